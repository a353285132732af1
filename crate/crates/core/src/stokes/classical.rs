use super::StokesError;
use crate::fields::{finite_or, CurlMeasure, MeasureRule, PiecewiseField, VectorField};
use crate::geometry::{BoundaryManifold, SolidRegion, TestFunction, Vec3};
use serde::Serialize;

/// `⟨μ · ν, φ⟩ = −∫_U ∇φ · dμ`, the normal trace of a divergence-free measure on `∂U`.
pub fn normal_trace_ext(
    mu: &CurlMeasure,
    region: &SolidRegion,
    testfn: &TestFunction,
    rule: &MeasureRule,
) -> Result<f64, StokesError> {
    if mu.is_zero() {
        return Ok(0.0);
    }
    Ok(-mu.integrate(region, &|x, d| testfn.gradient(x).dot(d), rule)?)
}

/// Residual norms of the four boundary identities with inner normal `ν`:
///
/// 1. `∫ curl F = ∫_∂ F × ν`
/// 2. `∫ (φ curl F − F × ∇φ) = ∫_∂ φ F × ν`
/// 3. `∫_∂ (F × G) · ν = ∫ F · curl G − ∫ curl F · G`
/// 4. `∫_∂ (F × ν) · G = ∫ curl F · G − ∫ F · curl G`
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ValidatorReport {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl ValidatorReport {
    pub fn max(&self) -> f64 {
        self.d1.max(self.d2).max(self.d3).max(self.d4)
    }
}

pub fn smooth_validators(
    f: &VectorField,
    region: &SolidRegion,
    phi: &TestFunction,
    g: &VectorField,
    order: usize,
) -> Result<ValidatorReport, StokesError> {
    let check = |v: &Vec3, x: &Vec3| -> Result<(), StokesError> {
        for c in v.iter() {
            finite_or(x, *c)?;
        }
        Ok(())
    };
    let (mut curl, mut weighted, mut mixed) = (Vec3::zeros(), Vec3::zeros(), 0.0);
    for n in region.volume_nodes(order) {
        let (fx, cf, gx, cg) = (f.eval(&n.x), f.curl(&n.x), g.eval(&n.x), g.curl(&n.x));
        check(&(fx + cf + gx + cg), &n.x)?;
        curl += cf * n.w;
        weighted += (cf * phi.eval(&n.x) - fx.cross(&phi.gradient(&n.x))) * n.w;
        mixed += (fx.dot(&cg) - cf.dot(&gx)) * n.w;
    }
    let (mut b1, mut b2, mut b3) = (Vec3::zeros(), Vec3::zeros(), 0.0);
    for p in &region.boundary {
        let q = p.rule(order);
        for (node, w) in q.nodes.iter().zip(&q.weights) {
            let (u, v) = (node[0], node[1]);
            let x = p.point(u, v);
            let nu = p.normal(u, v);
            let wj = w * p.metric_jacobian(u, v);
            let fx = f.eval(&x);
            check(&fx, &x)?;
            let fxn = fx.cross(&nu);
            b1 += fxn * wj;
            b2 += fxn * (phi.eval(&x) * wj);
            b3 += fx.cross(&g.eval(&x)).dot(&nu) * wj;
        }
    }
    Ok(ValidatorReport {
        d1: (curl - b1).norm(),
        d2: (weighted - b2).norm(),
        d3: (b3 - mixed).abs(),
        // `(F × ν) · G = −(F × G) · ν`.
        d4: (-b3 + mixed).abs(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FaradayCheck {
    /// `∫ curl E · ν` computed as `−∮ E · τ`.
    pub circulation_flux: f64,
    pub rate_flux: f64,
    pub residual: f64,
}

/// `|−∮_Γ E · τ + ∫_Σ ∂_tH · ν|` on a face.
pub fn faraday_face_check(
    e: &VectorField,
    dh_dt: &VectorField,
    face: &BoundaryManifold,
    order: usize,
) -> Result<FaradayCheck, StokesError> {
    let mut circ = 0.0;
    for n in face.boundary_nodes(order) {
        if n.w == 0.0 {
            continue;
        }
        circ += finite_or(&n.x, n.w * e.eval(&n.x).dot(&n.tau))?;
    }
    let p = &face.patch;
    let q = p.rule(order);
    let mut rate = 0.0;
    for (node, w) in q.nodes.iter().zip(&q.weights) {
        let x = p.point(node[0], node[1]);
        rate +=
            finite_or(&x, w * p.metric_jacobian(node[0], node[1]) * dh_dt.eval(&x).dot(&p.normal(node[0], node[1])))?;
    }
    Ok(FaradayCheck { circulation_flux: -circ, rate_flux: rate, residual: (-circ + rate).abs() })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RankineHugoniot {
    /// `max |(u⁺ − u⁻) · ν|`.
    pub normal: f64,
    /// `max |ν × (u⁺ − u⁻) − ω|`.
    pub tangential: f64,
}

/// Jump conditions of a piecewise field against a declared sheet density `ω`.
pub fn rankine_hugoniot_check(
    pf: &PiecewiseField,
    omega: &(dyn Fn(&Vec3) -> Vec3 + Sync),
    order: usize,
) -> RankineHugoniot {
    let p = &pf.interface;
    let nu = pf.normal();
    let q = p.rule(order);
    let (mut normal, mut tangential): (f64, f64) = (0.0, 0.0);
    for node in &q.nodes {
        let x = p.point(node[0], node[1]);
        let jump = pf.trace_plus(&x) - pf.trace_minus(&x);
        normal = normal.max(jump.dot(&nu).abs());
        tangential = tangential.max((nu.cross(&jump) - omega(&x)).norm());
    }
    RankineHugoniot { normal, tangential }
}
