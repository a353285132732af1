//! Tangential traces `F × ν` on region boundaries: distributional pairings, layer limits
//! and diagnostics.

mod diagnostics;
mod layers;

pub use diagnostics::{tangentiality_defect, trace_order_diagnostic, OrderFlag, TangentialityDefect, TraceDiagnostic};
pub use layers::{
    estimate_trace_layerwise, trace_pairing_via_layers, LayerOptions, LayerPairing, TangentialTrace, TraceSample,
};

use crate::fields::measure::MeasureSet;
use crate::fields::{curl4, gradient4, CurlMeasure, FieldError, MeasureRule, VectorField};
use crate::geometry::{GeometryError, SolidRegion, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Interior,
    Exterior,
}

impl std::str::FromStr for Side {
    type Err = TraceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interior" | "int" => Ok(Side::Interior),
            "exterior" | "ext" => Ok(Side::Exterior),
            _ => Err(TraceError::Unsupported(format!("side `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRule {
    pub measure: MeasureRule,
    /// Step of the fourth-order differences applied to test functions.
    pub fd_step: f64,
    /// Volume nodes closer than this to the declared singular set are dropped.
    pub exclusion: f64,
}

impl Default for TraceRule {
    fn default() -> Self {
        Self { measure: MeasureRule::default(), fd_step: 1e-3, exclusion: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type ScalarTest<'a> = &'a (dyn Fn(&Vec3) -> f64 + Sync);
pub type VectorTest<'a> = &'a (dyn Fn(&Vec3) -> Vec3 + Sync);

fn non_finite(x: &Vec3) -> TraceError {
    TraceError::Field(FieldError::NonFinite { point: [x.x, x.y, x.z] })
}

/// `Σ w g(x)` over the volume nodes of `set`, skipping nodes inside the exclusion radius.
fn volume_sum<S: MeasureSet + ?Sized>(
    set: &S,
    field: &VectorField,
    rule: &TraceRule,
    g: &(dyn Fn(&Vec3) -> Vec3 + Sync),
) -> Result<Vec3, TraceError> {
    set.volume_nodes(rule.measure.volume)
        .par_iter()
        .filter(|n| field.singular_distance(&n.x) > rule.exclusion)
        .map(|n| {
            let v = g(&n.x) * n.w;
            if v.iter().all(|c| c.is_finite()) {
                Ok(v)
            } else {
                Err(non_finite(&n.x))
            }
        })
        .try_reduce(Vec3::zeros, |a, b| Ok(a + b))
}

fn measure_vec<S: MeasureSet + ?Sized>(
    mu: &CurlMeasure,
    set: &S,
    testfn: ScalarTest<'_>,
    rule: &MeasureRule,
) -> Result<Vec3, TraceError> {
    let mut out = Vec3::zeros();
    if mu.is_zero() {
        return Ok(out);
    }
    for i in 0..3 {
        out[i] = mu.integrate(set, &|x, d| testfn(x) * d[i], rule)?;
    }
    Ok(out)
}

fn boundary_vec(
    mu: &CurlMeasure,
    region: &SolidRegion,
    testfn: ScalarTest<'_>,
    rule: &MeasureRule,
) -> Result<Vec3, TraceError> {
    let mut out = Vec3::zeros();
    for i in 0..3 {
        out[i] = mu.integrate_on_boundary(region, &|x, d| testfn(x) * d[i], rule)?;
    }
    Ok(out)
}

pub(crate) fn scalar_pairing_on<S: MeasureSet + ?Sized>(
    field: &VectorField,
    mu: &CurlMeasure,
    region: &SolidRegion,
    set: &S,
    testfn: ScalarTest<'_>,
    side: Side,
    rule: &TraceRule,
) -> Result<Vec3, TraceError> {
    let h = rule.fd_step;
    let vol = volume_sum(set, field, rule, &|x| field.eval(x).cross(&gradient4(testfn, x, h)))?;
    let interior = measure_vec(mu, set, testfn, &rule.measure)? - vol;
    Ok(match side {
        Side::Interior => interior,
        Side::Exterior => interior + boundary_vec(mu, region, testfn, &rule.measure)?,
    })
}

pub(crate) fn vector_pairing_on<S: MeasureSet + ?Sized>(
    field: &VectorField,
    mu: &CurlMeasure,
    region: &SolidRegion,
    set: &S,
    testvec: VectorTest<'_>,
    side: Side,
    rule: &TraceRule,
) -> Result<f64, TraceError> {
    let h = rule.fd_step;
    let vol = volume_sum(set, field, rule, &|x| Vec3::new(field.eval(x).dot(&curl4(testvec, x, h)), 0.0, 0.0))?.x;
    let meas = if mu.is_zero() { 0.0 } else { mu.integrate(set, &|x, d| testvec(x).dot(d), &rule.measure)? };
    let interior = meas - vol;
    Ok(match side {
        Side::Interior => interior,
        Side::Exterior => interior + mu.integrate_on_boundary(region, &|x, d| testvec(x).dot(d), &rule.measure)?,
    })
}

/// `⟨(F × ν)^{int}, φ⟩ = ∫_U φ d(curl F) − ∫_U F × ∇φ dx`; the exterior pairing adds the
/// part of `curl F` carried by `∂U`.
pub fn trace_pairing(
    field: &VectorField,
    mu: &CurlMeasure,
    region: &SolidRegion,
    testfn: ScalarTest<'_>,
    side: Side,
    rule: &TraceRule,
) -> Result<Vec3, TraceError> {
    scalar_pairing_on(field, mu, region, region, testfn, side, rule)
}

/// `⟨(F × ν)^{int}, φ⟩ = ∫_U φ · d(curl F) − ∫_U F · curl φ dx` for vector test fields.
pub fn trace_pairing_vector(
    field: &VectorField,
    mu: &CurlMeasure,
    region: &SolidRegion,
    testvec: VectorTest<'_>,
    side: Side,
    rule: &TraceRule,
) -> Result<f64, TraceError> {
    vector_pairing_on(field, mu, region, region, testvec, side, rule)
}
