use super::{Route, StokesError, StokesResult};
use crate::fields::sheet::ONE_SIDED_OFFSET;
use crate::fields::{finite_or, CurlMeasure, MeasureRule, ScalarFn, VecFn, VectorField};
use crate::geometry::quadrature::GaussLegendre;
use crate::geometry::{shift_transversal, Axis, BoundaryManifold, SurfacePatch, TestFunction, TransversalCollar, Vec3};
use crate::selection::{default_eps_grid, maximal_transversal};
use serde::Serialize;
use std::sync::Arc;

/// `(∫_Σ ∇_τφ · G dH², ∫_Σ |∇_τφ| |G| dH²)`.
pub(crate) fn surface_pairing(
    patch: &SurfacePatch,
    phi: &TestFunction,
    g: &(dyn Fn(&Vec3) -> Vec3 + Sync),
    order: usize,
) -> Result<(f64, f64), StokesError> {
    let rule = patch.rule(order);
    let mut val = 0.0;
    let mut scale = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let (u, v) = (node[0], node[1]);
        let x = patch.point(u, v);
        let grad = phi.tangential_gradient(&x, &patch.normal(u, v));
        if grad == Vec3::zeros() {
            continue;
        }
        let gx = g(&x);
        let wj = w * patch.metric_jacobian(u, v);
        val += finite_or(&x, wj * grad.dot(&gx))?;
        scale += wj * grad.norm() * gx.norm();
    }
    Ok((val, scale))
}

/// `(1 − |x − c|²/ρ²)⁸₊`.
fn radial_bump(c: Vec3, rho: f64) -> TestFunction {
    TestFunction::new(
        format!("radial_bump(rho={rho:.3})"),
        move |x| (1.0 - (x - c).norm_squared() / (rho * rho)).max(0.0).powi(8),
        move |x| {
            let q = (1.0 - (x - c).norm_squared() / (rho * rho)).max(0.0);
            (x - c) * (-16.0 * q.powi(7) / (rho * rho))
        },
    )
}

/// Radial bumps on `Σ` whose supports stay away from `Γ_Σ`.
pub fn interior_bumps(manifold: &BoundaryManifold) -> Vec<TestFunction> {
    let p = &manifold.patch;
    let d = p.domain();
    let edge: Vec<Vec3> = manifold.boundary_nodes(64).into_iter().map(|n| n.x).collect();
    let fallback = 0.25 * p.area(12).sqrt();
    let mut out = Vec::new();
    for fu in [0.0, 0.3, 0.55] {
        for fv in [0.0, 1.0 / 3.0, 2.0 / 3.0] {
            let u = d.u.0 + fu * (d.u.1 - d.u.0);
            let v =
                if d.v_periodic { d.v.0 + fv * (d.v.1 - d.v.0) } else { d.v.0 + (0.25 + 0.5 * fv) * (d.v.1 - d.v.0) };
            let c = p.point(u, v);
            let dist = edge.iter().map(|y| (y - c).norm()).fold(f64::INFINITY, f64::min);
            let rho = if edge.is_empty() { fallback } else { 0.6 * dist };
            if rho > 1e-6 && !out.iter().any(|(c0, _): &(Vec3, f64)| (c0 - c).norm() < 1e-9) {
                out.push((c, rho));
            }
        }
    }
    out.into_iter().map(|(c, rho)| radial_bump(c, rho)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivOptions {
    /// Surface rule order for pairings.
    pub order: usize,
    /// Largest accepted `sup |v · ν| / sup |v|`.
    pub tangential_tol: f64,
    /// Parameter grids used for the partition-of-unity mass estimates.
    pub mass_grids: Vec<usize>,
    /// Gauss points per cell and direction.
    pub cell_order: usize,
}

impl Default for DivOptions {
    fn default() -> Self {
        Self { order: 48, tangential_tol: 1e-8, mass_grids: vec![4, 8, 16, 32, 64], cell_order: 4 }
    }
}

/// Increment ratio above which the mass estimates are considered divergent.
const GROWTH_RATIO: f64 = 0.75;

/// A tangential field on `Σ` viewed through its distributional divergence.
#[derive(Clone, Serialize)]
pub struct ManifoldDivMeasure {
    pub manifold: BoundaryManifold,
    #[serde(skip)]
    field: VecFn,
    pub tangential_residual: f64,
    /// `(grid, Σ_i |⟨div_τ v, χ_i⟩|)` for interior hat partitions.
    pub mass_levels: Vec<(usize, f64)>,
    pub mass_bound: f64,
    pub bounded: bool,
    /// Point masses of `div_τ v`.
    pub atoms: Vec<(Vec3, f64)>,
    #[serde(skip)]
    density: Option<ScalarFn>,
    order: usize,
}

impl std::fmt::Debug for ManifoldDivMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManifoldDivMeasure")
            .field("tangential_residual", &self.tangential_residual)
            .field("mass_levels", &self.mass_levels)
            .field("bounded", &self.bounded)
            .finish()
    }
}

pub fn manifold_div_measure(
    v: VecFn,
    manifold: &BoundaryManifold,
    opts: &DivOptions,
) -> Result<ManifoldDivMeasure, StokesError> {
    let p = &manifold.patch;
    let rule = p.rule(opts.order.min(24));
    let (mut normal, mut size): (f64, f64) = (0.0, 0.0);
    for node in &rule.nodes {
        let x = p.point(node[0], node[1]);
        let f = v(&x);
        if f.iter().all(|c| c.is_finite()) {
            normal = normal.max(f.dot(&p.normal(node[0], node[1])).abs());
            size = size.max(f.norm());
        }
    }
    let residual = if size > 0.0 { normal / size } else { 0.0 };
    if residual > opts.tangential_tol {
        return Err(StokesError::NotTangential { residual });
    }
    let mass_levels = opts
        .mass_grids
        .iter()
        .map(|&n| Ok((n, hat_mass(p, manifold, &*v, n, opts.cell_order)?)))
        .collect::<Result<Vec<_>, StokesError>>()?;
    let m: Vec<f64> = mass_levels.iter().map(|l| l.1).collect();
    let k = m.len();
    let bounded = if k < 3 {
        true
    } else {
        let (d1, d2) = (m[k - 2] - m[k - 3], m[k - 1] - m[k - 2]);
        d2 <= 1e-9 * m[k - 1].max(1.0) || d2 <= GROWTH_RATIO * d1
    };
    Ok(ManifoldDivMeasure {
        manifold: manifold.clone(),
        field: v,
        tangential_residual: residual,
        mass_bound: m.last().copied().unwrap_or(0.0),
        mass_levels,
        bounded,
        atoms: Vec::new(),
        density: None,
        order: opts.order,
    })
}

/// `Σ |⟨div_τ v, χ_i⟩|` over bilinear hats on an `n × n` parameter grid whose supports avoid `Γ`.
fn hat_mass(
    p: &SurfacePatch,
    m: &BoundaryManifold,
    v: &(dyn Fn(&Vec3) -> Vec3 + Sync),
    n: usize,
    q: usize,
) -> Result<f64, StokesError> {
    use rayon::prelude::*;
    let d = p.domain();
    let hu = (d.u.1 - d.u.0) / n as f64;
    let hv = (d.v.1 - d.v.0) / n as f64;
    let degenerate = |u: f64| m.boundary.iter().all(|c| c.edge.axis != Axis::U || (c.edge.value - u).abs() > 1e-12);
    let deg = [degenerate(d.u.0), degenerate(d.u.1)];
    let u_ok = |i: usize| (i > 0 && i < n) || (i == 0 && deg[0]) || (i == n && deg[1]);
    let u_deg = |i: usize| (i == 0 && deg[0]) || (i == n && deg[1]);
    let v_ok = |j: usize| d.v_periodic || (j > 0 && j < n);
    let g = GaussLegendre::new(q);
    let stride = n + 1;
    let cells: Vec<Vec<(usize, f64)>> = (0..n * n)
        .into_par_iter()
        .map(|c| {
            let (ci, cj) = (c / n, c % n);
            let mut out = Vec::new();
            for (u, wu) in g.on(d.u.0 + ci as f64 * hu, d.u.0 + (ci + 1) as f64 * hu) {
                let xi = (u - d.u.0) / hu - ci as f64;
                for (vv, wv) in g.on(d.v.0 + cj as f64 * hv, d.v.0 + (cj + 1) as f64 * hv) {
                    let eta = (vv - d.v.0) / hv - cj as f64;
                    let x = p.point(u, vv);
                    let f = v(&x);
                    let wj = wu * wv * p.metric_jacobian(u, vv);
                    for (iu, hu_val, hu_der) in [(ci, 1.0 - xi, -1.0 / hu), (ci + 1, xi, 1.0 / hu)] {
                        if !u_ok(iu) {
                            continue;
                        }
                        if u_deg(iu) {
                            let grad = p.tangential_gradient(u, vv, hu_der, 0.0);
                            out.push((iu * stride + n, -wj * grad.dot(&f)));
                            continue;
                        }
                        for (jv, hv_val, hv_der) in [(cj, 1.0 - eta, -1.0 / hv), (cj + 1, eta, 1.0 / hv)] {
                            if !v_ok(jv) {
                                continue;
                            }
                            let jv = if d.v_periodic { jv % n } else { jv };
                            let grad = p.tangential_gradient(u, vv, hu_der * hv_val, hu_val * hv_der);
                            out.push((iu * stride + jv, -wj * grad.dot(&f)));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut a = vec![0.0; stride * stride];
    for (idx, val) in cells.into_iter().flatten() {
        if !val.is_finite() {
            return Err(StokesError::Precondition {
                what: "field is not integrable against hat gradients".into(),
                residual: val,
            });
        }
        a[idx] += val;
    }
    Ok(a.iter().map(|x| x.abs()).sum())
}

impl ManifoldDivMeasure {
    /// Declares point masses of the divergence.
    pub fn with_atoms(mut self, atoms: Vec<(Vec3, f64)>) -> Self {
        self.atoms = atoms;
        self
    }

    /// Declares the absolutely continuous part of the divergence.
    pub fn with_density(mut self, f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static) -> Self {
        self.density = Some(Arc::new(f));
        self
    }

    pub fn field(&self) -> &VecFn {
        &self.field
    }

    /// `⟨div_τ v, φ⟩ = −∫_Σ ∇_τφ · v dH²`.
    pub fn action(&self, phi: &TestFunction) -> Result<f64, StokesError> {
        Ok(-surface_pairing(&self.manifold.patch, phi, &*self.field, self.order)?.0)
    }

    /// `∫_Σ φ d(div_τ v)` from the declared atoms and density, or from a numerical divergence.
    pub fn divergence_integral(&self, phi: &TestFunction) -> Result<f64, StokesError> {
        let p = &self.manifold.patch;
        let mut acc: f64 = self.atoms.iter().map(|(x, w)| w * phi.eval(x)).sum();
        let rule = p.rule(self.order);
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            let (u, v) = (node[0], node[1]);
            let x = p.point(u, v);
            let div = match &self.density {
                Some(f) => f(&x),
                None => self.numeric_divergence(u, v),
            };
            acc += finite_or(&x, w * p.metric_jacobian(u, v) * div * phi.eval(&x))?;
        }
        Ok(acc)
    }

    /// `(1/J)(∂_u(J a) + ∂_v(J b))` with `v = a X_u + b X_v`.
    fn numeric_divergence(&self, u: f64, v: f64) -> f64 {
        let p = &self.manifold.patch;
        let comps = |u: f64, v: f64| {
            let (xu, xv) = p.tangents(u, v);
            let f = (self.field)(&p.point(u, v));
            let (e, fm, g) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
            let det = e * g - fm * fm;
            let (bu, bv) = (f.dot(&xu), f.dot(&xv));
            let j = p.metric_jacobian(u, v);
            (j * (g * bu - fm * bv) / det, j * (e * bv - fm * bu) / det)
        };
        let h = 1e-5;
        let du = (comps(u + h, v).0 - comps(u - h, v).0) / (2.0 * h);
        let dv = (comps(u, v + h).1 - comps(u, v - h).1) / (2.0 * h);
        (du + dv) / p.metric_jacobian(u, v)
    }

    /// `∫_Γ (v · ν_Γ) φ dH¹` with the inward conormal.
    pub fn boundary_flux(&self, phi: &TestFunction, n: usize) -> Result<f64, StokesError> {
        let mut acc = 0.0;
        for node in self.manifold.boundary_nodes(n) {
            if node.w == 0.0 {
                continue;
            }
            acc += finite_or(&node.x, node.w * (self.field)(&node.x).dot(&node.conormal) * phi.eval(&node.x))?;
        }
        Ok(acc)
    }
}

/// `−∫_Σ φ d(div_τ v) − ∫_Σ ∇_τφ · v dH²`.
pub fn gauss_green_manifold(div: &ManifoldDivMeasure, testfn: &TestFunction) -> Result<f64, StokesError> {
    Ok(-div.divergence_integral(testfn)? + div.action(testfn)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalStokes {
    pub result: StokesResult,
    pub shifted: BoundaryManifold,
    /// `M^Φ(curl F)(t)` and its one-sided part `M^{Φ,+}`.
    pub maximal: f64,
    pub maximal_plus: f64,
    /// Partition-of-unity estimate of `|div_τ(trace)|` on the shifted manifold.
    pub div_mass: f64,
    pub div_bounded: bool,
}

/// Line quadrature nodes used on the shifted boundary.
const TRANSVERSAL_LINE_NODES: usize = 128;

/// Stokes functional on `Σ^{Φ,t}` through the boundary representation of the Gauss–Green
/// functional of the one-sided trace, refused where the transversal maximal function is infinite.
pub fn stokes_transversal(
    field: &VectorField,
    mu: &CurlMeasure,
    manifold: &BoundaryManifold,
    collar: &TransversalCollar,
    t: f64,
    testfn: &TestFunction,
    rule: &MeasureRule,
) -> Result<TransversalStokes, StokesError> {
    let scan = maximal_transversal(mu, manifold, collar, &[t], &default_eps_grid(), rule)?;
    if !scan.values[0].is_finite() {
        return Err(StokesError::InfiniteMaximal { t });
    }
    let shifted = shift_transversal(manifold, collar, t)?;
    let p = shifted.patch.clone();
    let f = field.clone();
    let trace: VecFn = Arc::new(move |x: &Vec3| {
        let (u, v) = p.param_of(x);
        let n = p.normal(u, v);
        f.eval(&(x + n * ONE_SIDED_OFFSET)).cross(&n)
    });
    let div = manifold_div_measure(trace, &shifted, &DivOptions { tangential_tol: 1e-6, ..DivOptions::default() })?;
    let value = -div.boundary_flux(testfn, TRANSVERSAL_LINE_NODES)?;
    Ok(TransversalStokes {
        result: StokesResult::exact(Route::TransversalGaussGreen, value),
        shifted,
        maximal: scan.values[0],
        maximal_plus: scan.plus[0],
        div_mass: div.mass_bound,
        div_bounded: div.bounded,
    })
}
