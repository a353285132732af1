use super::{Side, TraceError, TraceRule, VectorTest};
use crate::extrapolate::{aitken_vec, richardson};
use crate::fields::VectorField;
use crate::geometry::{GeometryError, TransversalCollar, Vec3};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceSample {
    pub x: Vec3,
    pub patch: usize,
    pub u: f64,
    pub v: f64,
    /// Area weight of the node.
    pub weight: f64,
    pub normal: Vec3,
    pub value: Vec3,
    /// `|value · ν|`.
    pub residual: f64,
    pub converged: bool,
}

/// Layer limit of `F × ν` sampled on boundary nodes.
#[derive(Debug, Clone, Serialize)]
pub struct TangentialTrace {
    pub side: Side,
    pub t_grid: Vec<f64>,
    pub samples: Vec<TraceSample>,
    /// `max |value|` over the samples.
    pub sup_bound: f64,
}

impl TangentialTrace {
    pub fn max_residual(&self) -> f64 {
        self.samples.iter().filter(|s| s.converged).map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn converged_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 1.0;
        }
        self.samples.iter().filter(|s| s.converged).count() as f64 / self.samples.len() as f64
    }

    /// `∫_{∂U} value · φ dH²` by the sample weights.
    pub fn integrate(&self, phi: &dyn Fn(&Vec3) -> Vec3) -> f64 {
        self.samples.iter().map(|s| s.weight * s.value.dot(&phi(&s.x))).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerOptions {
    /// Decreasing collar parameters in `(0, 1/2)`.
    pub t_grid: Vec<f64>,
    /// Quadrature order per boundary patch.
    pub nodes: usize,
    /// Threshold on the change of the last two accelerated values.
    pub tol: f64,
}

impl Default for LayerOptions {
    fn default() -> Self {
        Self { t_grid: (3..=18).map(|k| 0.5f64.powi(k)).collect(), nodes: 8, tol: 1e-6 }
    }
}

/// Values of `F(Φ(t, x)) × ν_t` along the `t` grid, accelerated by Aitken's Δ².
pub fn estimate_trace_layerwise(
    field: &VectorField,
    collar: &TransversalCollar,
    side: Side,
    opts: &LayerOptions,
) -> Result<TangentialTrace, TraceError> {
    if opts.t_grid.len() < 4 {
        return Err(TraceError::Unsupported("layer extrapolation needs at least four t values".into()));
    }
    for w in opts.t_grid.windows(2) {
        if !(w[1] < w[0]) {
            return Err(GeometryError::Mismatch("t grid must be decreasing".into()).into());
        }
    }
    if let Some(&t) = opts.t_grid.iter().find(|t| !(**t > 0.0 && **t < 0.5)) {
        return Err(GeometryError::OutOfRange { name: "t", value: t, range: "(0, 1/2)" }.into());
    }
    let sign = match side {
        Side::Interior => 1.0,
        Side::Exterior => -1.0,
    };
    let mut jobs = Vec::new();
    for (k, patch) in collar.region.boundary.iter().enumerate() {
        let rule = patch.rule(opts.nodes);
        for (node, w) in rule.nodes.iter().zip(&rule.weights) {
            jobs.push((k, node[0], node[1], w * patch.metric_jacobian(node[0], node[1])));
        }
    }
    let samples: Vec<TraceSample> = jobs
        .par_iter()
        .map(|&(k, u, v, weight)| {
            let patch = &collar.region.boundary[k];
            let x = patch.point(u, v);
            let normal = patch.normal(u, v);
            let seq: Vec<Vec3> = opts
                .t_grid
                .iter()
                .map(|&t| {
                    let ts = sign * t;
                    let y = collar.phi(k, ts, &x);
                    field.eval(&y).cross(&collar.shifted_normal(k, patch, ts, u, v))
                })
                .filter(|v| v.iter().all(|c| c.is_finite()))
                .collect();
            let acc = aitken_vec(&seq);
            let (value, converged) = match acc.len() {
                0 => (seq.last().copied().unwrap_or_else(Vec3::zeros), false),
                1 => (acc[0], false),
                n => (acc[n - 1], (acc[n - 1] - acc[n - 2]).amax() < opts.tol),
            };
            TraceSample { x, patch: k, u, v, weight, normal, value, residual: value.dot(&normal).abs(), converged }
        })
        .collect();
    let sup_bound = samples.iter().map(|s| s.value.norm()).fold(0.0, f64::max);
    Ok(TangentialTrace { side, t_grid: opts.t_grid.clone(), samples, sup_bound })
}

/// The sequence `∫_{shell_ε} (F × ∇ψ_ε) · φ dx` and its Richardson limit.
#[derive(Debug, Clone, Serialize)]
pub struct LayerPairing {
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolated: f64,
    /// Difference of the last two extrapolants.
    pub error: f64,
    pub converged: bool,
}

/// Richardson levels applied to the shell sequence.
const SHELL_LEVELS: usize = 2;
/// Gauss points across the shell.
const SHELL_DEPTH_ORDER: usize = 4;

/// Solid height function route `ψ_ε = s/ε` on `Φ((0, ε) × ∂U)`; `eps_grid` must halve.
pub fn trace_pairing_via_layers(
    field: &VectorField,
    collar: &TransversalCollar,
    testvec: VectorTest<'_>,
    eps_grid: &[f64],
    rule: &TraceRule,
) -> Result<LayerPairing, TraceError> {
    for w in eps_grid.windows(2) {
        if (w[0] / w[1] - 2.0).abs() > 1e-9 {
            return Err(GeometryError::Mismatch("eps grid must halve at each step".into()).into());
        }
    }
    if let Some(&e) = eps_grid.iter().find(|e| !(**e > 0.0 && **e < 0.5)) {
        return Err(GeometryError::OutOfRange { name: "eps", value: e, range: "(0, 1/2)" }.into());
    }
    let values = eps_grid
        .iter()
        .map(|&eps| {
            let nodes = collar.shell_nodes(0.0, eps, SHELL_DEPTH_ORDER, rule.measure.sheet);
            nodes
                .par_iter()
                .filter(|n| field.singular_distance(&n.x) > rule.exclusion)
                .map(|n| {
                    let v = n.w * field.eval(&n.x).cross(&n.grad_s).dot(&testvec(&n.x)) / eps;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(super::non_finite(&n.x))
                    }
                })
                .sum::<Result<f64, TraceError>>()
        })
        .collect::<Result<Vec<f64>, TraceError>>()?;
    let col = richardson(&values, SHELL_LEVELS.min(values.len().saturating_sub(1)));
    let (extrapolated, error) = match col.len() {
        0 => (f64::NAN, f64::INFINITY),
        1 => (col[0], f64::INFINITY),
        n => (col[n - 1], (col[n - 1] - col[n - 2]).abs()),
    };
    Ok(LayerPairing {
        eps: eps_grid.to_vec(),
        values,
        extrapolated,
        error,
        converged: error <= 1e-5 * extrapolated.abs().max(1.0),
    })
}
