use super::{vector_pairing_on, Side, TraceError, TraceRule};
use crate::fields::measure::MeasureSet;
use crate::fields::sheet::ONE_SIDED_OFFSET;
use crate::fields::{CurlMeasure, VecFn, VectorField};
use crate::geometry::quadrature::{trapezoid_periodic, GaussLegendre};
use crate::geometry::{extend_boundary_function, RegionKind, SolidRegion, SurfacePatch, Vec3, VolumeNode};
use serde::Serialize;
use std::f64::consts::PI;

/// Stencil order of the extension operator used for boundary data.
const EXTENSION_ORDER: usize = 4;

/// Region whose volume rule is split at the extension depths.
struct Layered<'a> {
    region: &'a SolidRegion,
    depths: Vec<f64>,
}

impl MeasureSet for Layered<'_> {
    fn volume_nodes(&self, n: usize) -> Vec<VolumeNode> {
        let RegionKind::Ball { center, radius } = self.region.kind else {
            return self.region.volume_nodes(n);
        };
        let g = GaussLegendre::new(n);
        let mut cuts: Vec<f64> = self.depths.iter().map(|d| radius - d).filter(|r| *r > 0.0).collect();
        cuts.extend([0.0, radius]);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tp = trapezoid_periodic(2 * n, 0.0, 2.0 * PI);
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            for (r, wr) in g.on(w[0], w[1]) {
                for (c, wc) in g.on(-1.0, 1.0) {
                    let sb = (1.0 - c * c).sqrt();
                    for &(p, wp) in &tp {
                        out.push(VolumeNode {
                            x: center + Vec3::new(sb * p.cos(), sb * p.sin(), c) * r,
                            w: wr * wc * wp * r * r,
                        });
                    }
                }
            }
        }
        out
    }
    fn levels(&self, x: &Vec3) -> Vec<f64> {
        self.region.levels(x)
    }
    fn contains(&self, x: &Vec3) -> bool {
        self.region.contains(x)
    }
    fn clip_segment(&self, p: &Vec3, d: &Vec3, lo: f64, hi: f64, _grid: usize) -> Vec<(f64, f64)> {
        self.region.clip_segment(p, d, lo, hi)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TangentialityDefect {
    /// `𝒯(Eφ)`.
    pub full: f64,
    /// `𝒯(Eφ_τ)`.
    pub tangential: f64,
    pub defect: f64,
}

/// `|𝒯(φ) − 𝒯(φ_τ)|` with both boundary data extended inward by the mollified extension
/// of depth `delta`. Regions must have a single boundary patch.
pub fn tangentiality_defect(
    field: &VectorField,
    mu: &CurlMeasure,
    region: &SolidRegion,
    data: VecFn,
    delta: f64,
    side: Side,
    rule: &TraceRule,
) -> Result<TangentialityDefect, TraceError> {
    let [patch] = region.boundary.as_slice() else {
        return Err(TraceError::Unsupported("tangentiality defect needs a region bounded by one patch".into()));
    };
    let extend = |f: VecFn| -> Result<VecFn, TraceError> {
        let comps = (0..3)
            .map(|i| {
                let f = f.clone();
                extend_boundary_function(patch, move |x| f(x)[i], delta, EXTENSION_ORDER)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(std::sync::Arc::new(move |x: &Vec3| Vec3::new(comps[0].eval(x), comps[1].eval(x), comps[2].eval(x))))
    };
    let p = patch.clone();
    let d = data.clone();
    let tangential: VecFn = std::sync::Arc::new(move |x: &Vec3| {
        let (u, v) = p.param_of(x);
        let n = p.normal(u, v);
        let f = d(x);
        f - n * f.dot(&n)
    });
    let set = Layered { region, depths: vec![delta, 0.5 * delta] };
    let full_ext = extend(data)?;
    let tan_ext = extend(tangential)?;
    let full = vector_pairing_on(field, mu, region, &set, &*full_ext, side, rule)?;
    let tangential = vector_pairing_on(field, mu, region, &set, &*tan_ext, side, rule)?;
    Ok(TangentialityDefect { full, tangential, defect: (full - tangential).abs() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderFlag {
    /// Total variation stays bounded: the trace is a measure.
    OrderZero,
    /// Total variation grows without bound as the exclusion shrinks.
    OrderOneOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceDiagnostic {
    pub epsilon_grid: Vec<f64>,
    pub total_variation: Vec<f64>,
    pub order_flag: OrderFlag,
    /// Last increment per unit of `ln(1/ε)`.
    pub log_slope: f64,
    /// Exponent `a` of a fit `TV ∝ ε^{−a}` on the last two points.
    pub power_exponent: f64,
}

/// Growth ratio of the log slope above which the variation is considered unbounded.
const GROWTH_RATIO: f64 = 0.5;

/// `∫ |F × ν|` over the patch minus the `ε`-neighborhood of the declared singular set, using
/// interior one-sided values.
pub fn trace_order_diagnostic(
    field: &VectorField,
    patch: &SurfacePatch,
    eps_grid: &[f64],
    order: usize,
) -> TraceDiagnostic {
    let d = patch.domain();
    let g = GaussLegendre::new(order);
    let vs: Vec<(f64, f64)> =
        if d.v_periodic { trapezoid_periodic(2 * order, d.v.0, d.v.1 - d.v.0) } else { g.on(d.v.0, d.v.1).collect() };
    let width = d.u.1 - d.u.0;
    let mut cuts: Vec<f64> = (0..52).map(|k| d.u.0 + width * 0.5f64.powi(k)).collect();
    cuts.extend(eps_grid.iter().map(|e| d.u.0 + e).filter(|u| *u > d.u.0 && *u < d.u.1));
    cuts.push(d.u.0);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut samples = Vec::new();
    for w in cuts.windows(2) {
        for (u, wu) in g.on(w[0], w[1]) {
            for &(v, wv) in &vs {
                let x = patch.point(u, v);
                let n = patch.normal(u, v);
                let val = field.eval(&(x + n * ONE_SIDED_OFFSET)).cross(&n).norm();
                samples.push((field.singular_distance(&x), wu * wv * patch.metric_jacobian(u, v) * val));
            }
        }
    }
    let tv: Vec<f64> = eps_grid
        .iter()
        .map(|&e| samples.iter().filter(|(dist, w)| *dist > e && w.is_finite()).map(|s| s.1).sum())
        .collect();
    let slope = |i: usize| (tv[i + 1] - tv[i]) / (eps_grid[i] / eps_grid[i + 1]).ln();
    let n = tv.len();
    let (log_slope, power_exponent, order_flag) = if n < 2 {
        (0.0, 0.0, OrderFlag::OrderZero)
    } else {
        let last = slope(n - 2);
        let power = if tv[n - 2] > 0.0 && tv[n - 1] > 0.0 {
            (tv[n - 1] / tv[n - 2]).ln() / (eps_grid[n - 2] / eps_grid[n - 1]).ln()
        } else {
            0.0
        };
        let tiny = 1e-12 * tv[n - 1].abs().max(1.0);
        let flag = if last <= tiny {
            OrderFlag::OrderZero
        } else if n < 3 || last > GROWTH_RATIO * slope(n - 3) {
            OrderFlag::OrderOneOnly
        } else {
            OrderFlag::OrderZero
        };
        (last, power, flag)
    };
    TraceDiagnostic { epsilon_grid: eps_grid.to_vec(), total_variation: tv, order_flag, log_slope, power_exponent }
}
