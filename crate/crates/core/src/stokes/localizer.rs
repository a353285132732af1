use super::classical::normal_trace_ext;
use super::manifold::{interior_bumps, surface_pairing};
use super::{assemble, Route, StokesError, StokesOptions, StokesResult};
use crate::extrapolate::{richardson, spread};
use crate::fields::{CurlMeasure, MeasureRule};
use crate::geometry::quadrature::{split_points, GaussLegendre};
use crate::geometry::{
    clip_intervals, height_function, BandNode, CollarKind, GeometryError, SolidRegion, TangentialCollar, TestFunction,
    Vec3,
};
use rayon::prelude::*;
use serde::Serialize;

pub type SurfaceField<'a> = &'a (dyn Fn(&Vec3) -> Vec3 + Sync);

/// `(δ, Σ_nodes w · g(node))` over the ramp nodes of `ψ_{t,δ}` for every admissible `δ`.
fn ramp_sequence(
    collar: &TangentialCollar,
    t: f64,
    opts: &StokesOptions,
    g: &(dyn Fn(&BandNode) -> f64 + Sync),
) -> Result<Vec<(f64, f64)>, StokesError> {
    let deltas: Vec<f64> = opts.deltas.iter().copied().filter(|d| t + d <= 1.0).collect();
    if deltas.is_empty() {
        return Err(GeometryError::OutOfRange {
            name: "delta",
            value: opts.deltas.first().copied().unwrap_or(f64::NAN),
            range: "(0, 1 - t]",
        }
        .into());
    }
    deltas
        .par_iter()
        .map(|&d| {
            let h = height_function(collar, t, d)?;
            let mut acc = 0.0;
            for n in h.ramp_nodes(&opts.breaks, opts.ramp_order, opts.layer_nodes) {
                let val = n.w * g(&n);
                if !val.is_finite() {
                    return Err(GeometryError::NonFinite { point: [n.x.x, n.x.y, n.x.z] }.into());
                }
                acc += val;
            }
            Ok((d, acc))
        })
        .collect()
}

/// `𝔖(φ) = −lim_δ ∫_Σ trace · φ ∇_τψ_{t,δ} dH²`.
pub fn stokes_tangential(
    trace: SurfaceField<'_>,
    collar: &TangentialCollar,
    t: f64,
    testfn: &TestFunction,
    opts: &StokesOptions,
) -> Result<StokesResult, StokesError> {
    let seq = ramp_sequence(collar, t, opts, &|n| -testfn.eval(&n.x) * trace(&n.x).dot(&n.grad_s))?;
    Ok(assemble(Route::TangentialLocalizer, seq, opts))
}

#[derive(Debug, Clone, Serialize)]
pub struct VorticityFlux {
    pub flux: f64,
    pub result: StokesResult,
    /// Difference to the value obtained with a second cutoff equal to one on `Σ`.
    pub cutoff_gap: f64,
}

/// Total mass `μ(Γ^t)`: the Stokes functional at a cutoff equal to one near `Σ^{τ,t}`.
pub fn vorticity_flux(
    trace: SurfaceField<'_>,
    collar: &TangentialCollar,
    t: f64,
    opts: &StokesOptions,
) -> Result<VorticityFlux, StokesError> {
    let result = stokes_tangential(trace, collar, t, &TestFunction::constant(1.0), opts)?;
    let flux = result.value()?;
    let p = collar.patch().clone();
    let q = p.clone();
    let second = TestFunction::new(
        "one_on_surface",
        move |x| 1.0 + (x - p.project(x)).norm_squared(),
        move |x| (x - q.project(x)) * 2.0,
    );
    let other = stokes_tangential(trace, collar, t, &second, opts)?.value()?;
    Ok(VorticityFlux { flux, result, cutoff_gap: (other - flux).abs() })
}

#[derive(Debug, Clone, Serialize)]
pub struct StokesDensity {
    pub point: Vec3,
    pub t: f64,
    pub r_grid: Vec<f64>,
    /// `μ(B_r ∩ Γ^t) / H¹(B_r ∩ Γ^t)` for each `r`.
    pub estimates: Vec<f64>,
    pub limit: Option<f64>,
}

/// Relative spread of the last three ratios accepted as a density limit.
const DENSITY_TOL: f64 = 1e-3;
/// Ramp widths per radius are `r 2^{-i}` for `i` in this range.
const DENSITY_RAMP_LEVELS: std::ops::RangeInclusive<i32> = 2..=7;

/// Density of the Stokes measure with respect to `H¹` on `Γ^t` at `x0`.
///
/// Only collars of constant-`u` edges are supported; the ball is replaced by the arc of
/// `Γ^t` within distance `r` of `x0`, swept across the ramp.
pub fn stokes_density(
    trace: SurfaceField<'_>,
    collar: &TangentialCollar,
    t: f64,
    x0: &Vec3,
    r_grid: &[f64],
    opts: &StokesOptions,
) -> Result<StokesDensity, StokesError> {
    let CollarKind::Strip { edges } = &collar.kind else {
        return Err(GeometryError::Unsupported("density needs a strip collar".into()).into());
    };
    height_function(collar, t, opts.deltas.iter().copied().fold(0.0, f64::max).min(1.0 - t))?;
    let p = collar.patch();
    let d = p.domain();
    let g = GaussLegendre::new(opts.ramp_order);
    let estimates = r_grid
        .par_iter()
        .map(|&r| {
            let mut length = 0.0;
            let mut arcs = Vec::new();
            for (k, &(val, inw, l)) in edges.iter().enumerate() {
                let near = |v: f64| r - (collar.psi(t, k, v) - x0).norm();
                let iv = clip_intervals(d.v.0, d.v.1, 256, &|v| vec![near(v)], &|v| near(v) > 0.0);
                let u = val + inw * t * l;
                for &(a, b) in &iv {
                    length += g.integrate(a, b, |v| p.tangents(u, v).1.norm());
                }
                arcs.push((val, inw, l, iv));
            }
            if length <= 0.0 {
                return Err(StokesError::Precondition {
                    what: "point is not on the shrunk boundary".into(),
                    residual: r,
                });
            }
            let mass: Vec<f64> = DENSITY_RAMP_LEVELS
                .map(|i| {
                    let delta = (r * 0.5f64.powi(i)).min(1.0 - t);
                    let mut acc = 0.0;
                    for (val, inw, l, iv) in &arcs {
                        for w in split_points(t, t + delta, &opts.breaks).windows(2) {
                            for (s, ws) in g.on(w[0], w[1]) {
                                let u = val + inw * s * l;
                                if (collar.level(u, 0.0) - s).abs() > 1e-12 {
                                    continue;
                                }
                                for &(a, b) in iv {
                                    for (v, wv) in g.on(a, b) {
                                        let x = p.point(u, v);
                                        let grad = p.tangential_gradient(u, v, inw / l, 0.0) / delta;
                                        acc -= ws * l * wv * p.metric_jacobian(u, v) * trace(&x).dot(&grad);
                                    }
                                }
                            }
                        }
                    }
                    acc
                })
                .collect();
            let ext = richardson(&mass, 2);
            Ok(ext[ext.len() - 1] / length)
        })
        .collect::<Result<Vec<f64>, StokesError>>()?;
    let n = estimates.len();
    let limit = (n >= 3 && spread(&estimates[n - 3..]) <= DENSITY_TOL * estimates[n - 1].abs().max(1.0))
        .then(|| estimates[n - 1]);
    Ok(StokesDensity { point: *x0, t, r_grid: r_grid.to_vec(), estimates, limit })
}

/// `⟨⟨G·ν, φ⟩⟩ = lim_δ ∫_Σ φ G · ∇_τψ_{t,δ} dH²`.
pub fn boundary_pairing(
    g: SurfaceField<'_>,
    collar: &TangentialCollar,
    t: f64,
    testfn: &TestFunction,
    opts: &StokesOptions,
) -> Result<StokesResult, StokesError> {
    let seq = ramp_sequence(collar, t, opts, &|n| testfn.eval(&n.x) * g(&n.x).dot(&n.grad_s))?;
    Ok(assemble(Route::MassPairing, seq, opts))
}

/// Pairing against `testfn` and the mass `−⟨⟨G·ν, 𝟙⟩⟩`.
pub fn boundary_pairing_mass(
    g: SurfaceField<'_>,
    collar: &TangentialCollar,
    t: f64,
    testfn: &TestFunction,
    opts: &StokesOptions,
) -> Result<(StokesResult, f64), StokesError> {
    let pairing = boundary_pairing(g, collar, t, testfn, opts)?;
    let mass = -boundary_pairing(g, collar, t, &TestFunction::constant(1.0), opts)?.value()?;
    Ok((pairing, mass))
}

/// Relative tolerance on `∫ ∇_τφ · (G₁ − G₂)` for interior bumps.
const SAME_DIVERGENCE_TOL: f64 = 1e-6;
/// Absolute tolerance on the match between `div_τ G` and the normal trace of the curl.
const CM1_TOL: f64 = 1e-4;
/// Surface quadrature order used for precondition pairings.
const PAIRING_ORDER: usize = 48;

/// `|mass(G₁) − mass(G₂)|` after checking that `div_τ(G₁ − G₂)` vanishes in the interior.
pub fn mass_representative_independence(
    g1: SurfaceField<'_>,
    g2: SurfaceField<'_>,
    collar: &TangentialCollar,
    t: f64,
    opts: &StokesOptions,
) -> Result<f64, StokesError> {
    let m = &collar.manifold;
    let diff = |x: &Vec3| g1(x) - g2(x);
    let mut worst: f64 = 0.0;
    for b in interior_bumps(m) {
        let (val, scale) = surface_pairing(&m.patch, &b, &diff, PAIRING_ORDER)?;
        worst = worst.max(val.abs() / scale.max(1.0));
    }
    if worst > SAME_DIVERGENCE_TOL {
        return Err(StokesError::Precondition {
            what: "representatives have different tangential divergence".into(),
            residual: worst,
        });
    }
    let one = TestFunction::constant(1.0);
    let a = boundary_pairing_mass(g1, collar, t, &one, opts)?.1;
    let b = boundary_pairing_mass(g2, collar, t, &one, opts)?.1;
    Ok((a - b).abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct Cm1Flux {
    /// `−⟨⟨G·ν, 𝟙⟩⟩`.
    pub flux: f64,
    /// Largest `|⟨div_τ G, φ⟩ − ⟨curl F · ν, φ⟩|` over interior bumps.
    pub precondition_residual: f64,
    /// Normal trace of the curl against an extension of `ψ_{t,δ}`.
    pub cross_check: f64,
}

/// Ramp width used by the normal-trace cross-check.
const CROSS_CHECK_DELTA: f64 = 1.0 / 16.0;

/// Vorticity flux through `Σ^{τ,t}` by the mass of a tangential representative `G` of the
/// normal trace of `curl F`.
pub fn vorticity_flux_cm1(
    mu: &CurlMeasure,
    region: &SolidRegion,
    g: SurfaceField<'_>,
    collar: &TangentialCollar,
    t: f64,
    opts: &StokesOptions,
    rule: &MeasureRule,
) -> Result<Cm1Flux, StokesError> {
    let m = &collar.manifold;
    let mut residual: f64 = 0.0;
    for b in interior_bumps(m) {
        let (val, _) = surface_pairing(&m.patch, &b, g, PAIRING_ORDER)?;
        let normal = normal_trace_ext(mu, region, &b, rule)?;
        residual = residual.max((-val - normal).abs());
    }
    if residual > CM1_TOL {
        return Err(StokesError::Precondition {
            what: "G does not represent the normal trace of the curl".into(),
            residual,
        });
    }
    let flux = -boundary_pairing(g, collar, t, &TestFunction::constant(1.0), opts)?.value()?;
    let cross_check = normal_trace_ext(mu, region, &extended_localizer(collar, region, t)?, rule)?;
    Ok(Cm1Flux { flux, precondition_residual: residual, cross_check })
}

/// `ψ_{t,δ}(π(x)) χ(h)` with `π` the foot point on `Σ`, `h` the depth along the inward normal
/// and `χ` a cubic cutoff vanishing at half the depth of the region below the patch center.
fn extended_localizer(collar: &TangentialCollar, region: &SolidRegion, t: f64) -> Result<TestFunction, StokesError> {
    let p = collar.patch().clone();
    let dom = p.domain();
    let (uc, vc) = (0.5 * (dom.u.0 + dom.u.1), 0.5 * (dom.v.0 + dom.v.1));
    let n0 = p.normal(uc, vc);
    let depth = region
        .clip_line(&p.point(uc, vc), &n0, 0.0, 1e3)
        .map(|(_, hi)| 0.5 * hi)
        .filter(|d| *d > 0.0)
        .ok_or_else(|| GeometryError::Mismatch("region does not lie on the inner side of the patch".into()))?;
    let h = height_function(collar, t, CROSS_CHECK_DELTA.min(1.0 - t))?;
    let f = move |x: &Vec3| {
        let (u, v) = p.param_of(x);
        let along = (x - p.point(u, v)).dot(&p.normal(u, v));
        let chi = (1.0 - along / depth).clamp(0.0, 1.0).powi(3);
        if !p.contains_param(u, v, 0.0) {
            return 0.0;
        }
        h.value(u, v) * chi
    };
    let fd = std::sync::Arc::new(f);
    let fg = fd.clone();
    let step = 1e-6;
    Ok(TestFunction::new(
        "extended_localizer",
        move |x| fd(x),
        move |x| {
            let mut g = Vec3::zeros();
            for i in 0..3 {
                let mut e = Vec3::zeros();
                e[i] = step;
                g[i] = (fg(&(x + e)) - fg(&(x - e))) / (2.0 * step);
            }
            g
        },
    ))
}
