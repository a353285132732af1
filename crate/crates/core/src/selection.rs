//! Maximal functions over collar parameters and the selection of good manifolds.

use crate::fields::measure::{MeasureRule, MeasureSet};
use crate::fields::{CurlMeasure, FieldError};
use crate::geometry::{
    BoundaryManifold, GeometryError, SurfacePatch, TangentialCollar, TransversalCollar, Vec3, VolumeNode,
};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectionError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("t grid must be uniform")]
    NonUniformGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Transversal,
    Tangential,
}

/// Maximal function sampled on a grid of collar parameters.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalScan {
    pub direction: Direction,
    pub t_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    /// Two-sided values; `+∞` where the layer mass does not shrink with `ε`.
    pub values: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// Mass of the whole collar image swept by the scan.
    pub collar_mass: f64,
}

/// Default `ε` samples `2^{-k}`, `k = 2..=12`.
pub fn default_eps_grid() -> Vec<f64> {
    (2..=12).map(|k| 0.5f64.powi(k)).collect()
}

/// Mass ratio between the two finest shells above which the mass is taken as concentrated.
const CONCENTRATION_RATIO: f64 = 0.75;

/// `sup_ε m(ε)/ε`, or `+∞` when the finest masses stop shrinking.
fn grid_sup(eps: &[f64], masses: &[f64]) -> f64 {
    let n = masses.len();
    if n >= 2 {
        let (prev, last) = (masses[n - 2], masses[n - 1]);
        let tiny = 1e-12 * masses.iter().copied().fold(0.0, f64::max).max(1e-300);
        if last > tiny && last >= CONCENTRATION_RATIO * prev {
            return f64::INFINITY;
        }
    }
    eps.iter().zip(masses).map(|(e, m)| m / e).fold(0.0, f64::max)
}

/// Two-sided and one-sided grid suprema; the two-sided value dominates the one-sided ones.
fn sups(eps: &[f64], two: &[f64], plus: &[f64], minus: &[f64]) -> (f64, f64, f64) {
    let (p, m) = (grid_sup(eps, plus), grid_sup(eps, minus));
    (grid_sup(eps, two).max(p).max(m), p, m)
}

/// `Φ([s0, s1) × Σ)` for the patch `Σ` carried by boundary patch `k` of the collar.
struct Shell<'a> {
    collar: &'a TransversalCollar,
    k: usize,
    patch: &'a SurfacePatch,
    s0: f64,
    s1: f64,
    depth_order: usize,
}

impl Shell<'_> {
    fn coords(&self, x: &Vec3) -> Option<(f64, f64)> {
        let (s, foot) = self.collar.fields[self.k].invert(x, self.patch)?;
        let (u, v) = self.patch.param_of(&foot);
        Some((s, self.patch.param_margin(u, v)))
    }
}

impl MeasureSet for Shell<'_> {
    fn volume_nodes(&self, n: usize) -> Vec<VolumeNode> {
        self.collar
            .shell_nodes_on(self.k, self.patch, self.s0, self.s1, self.depth_order, n)
            .into_iter()
            .map(|s| VolumeNode { x: s.x, w: s.w })
            .collect()
    }
    fn levels(&self, x: &Vec3) -> Vec<f64> {
        match self.coords(x) {
            Some((s, m)) => vec![s - self.s0, self.s1 - s, m],
            None => vec![-1.0],
        }
    }
    fn contains(&self, x: &Vec3) -> bool {
        matches!(self.coords(x), Some((s, m)) if s >= self.s0 && s < self.s1 && m > 0.0)
    }
}

fn shell<'a>(
    collar: &'a TransversalCollar,
    manifold: &'a BoundaryManifold,
    s0: f64,
    s1: f64,
) -> Result<Shell<'a>, GeometryError> {
    let k = collar
        .patch_index(&manifold.patch)
        .ok_or_else(|| GeometryError::Mismatch("manifold is not part of the collar boundary".into()))?;
    let probe = &manifold.patch.rule(1).nodes[0];
    if collar.fields[k].invert(&manifold.patch.point(probe[0], probe[1]), &manifold.patch).is_none() {
        return Err(GeometryError::Unsupported("shell clipping needs an invertible collar field".into()));
    }
    Ok(Shell { collar, k, patch: &manifold.patch, s0, s1, depth_order: 4 })
}

fn shell_mass(mu: &CurlMeasure, set: &Shell<'_>, rule: &MeasureRule) -> Result<f64, FieldError> {
    mu.integrate(set, &|_, d| d.norm(), rule)
}

/// `M^Φ(t) = sup_ε |μ|(Φ((t − ε, t + ε) × Σ)) / ε` with the one-sided variants on
/// `(t, t + ε)` and `(t − ε, t)`.
pub fn maximal_transversal(
    mu: &CurlMeasure,
    manifold: &BoundaryManifold,
    collar: &TransversalCollar,
    t_grid: &[f64],
    eps_grid: &[f64],
    rule: &MeasureRule,
) -> Result<MaximalScan, SelectionError> {
    check_t_grid(t_grid)?;
    shell(collar, manifold, 0.0, 1.0)?;
    let rows = t_grid
        .par_iter()
        .map(|&t| {
            let mut two = Vec::with_capacity(eps_grid.len());
            let mut plus = Vec::with_capacity(eps_grid.len());
            let mut minus = Vec::with_capacity(eps_grid.len());
            for &e in eps_grid {
                let lo = shell_mass(mu, &shell(collar, manifold, t - e, t)?, rule)?;
                let hi = shell_mass(mu, &shell(collar, manifold, t, t + e)?, rule)?;
                two.push(lo + hi);
                plus.push(hi);
                minus.push(lo);
            }
            Ok(sups(eps_grid, &two, &plus, &minus))
        })
        .collect::<Result<Vec<_>, SelectionError>>()?;
    let mut whole = shell(collar, manifold, -0.5, 0.5)?;
    whole.depth_order = rule.volume;
    let collar_mass = shell_mass(mu, &whole, rule)?;
    Ok(MaximalScan {
        direction: Direction::Transversal,
        t_grid: t_grid.to_vec(),
        epsilon_grid: eps_grid.to_vec(),
        values: rows.iter().map(|r| r.0).collect(),
        plus: rows.iter().map(|r| r.1).collect(),
        minus: rows.iter().map(|r| r.2).collect(),
        collar_mass,
    })
}

/// Tangential maximal function of a nonnegative surface density `g` on `Σ`: layer masses of
/// `Ψ((t − ε, t + ε) × Γ)` over `ε`. `breaks` are collar parameters where `g` jumps.
pub fn maximal_tangential(
    density: &(dyn Fn(&Vec3) -> f64 + Sync),
    collar: &TangentialCollar,
    t_grid: &[f64],
    eps_grid: &[f64],
    breaks: &[f64],
    order: usize,
) -> Result<MaximalScan, SelectionError> {
    check_t_grid(t_grid)?;
    let nv = 4 * order;
    let mass = |a: f64, b: f64| -> Result<f64, FieldError> {
        collar
            .band_nodes(a, b, breaks, order, nv)
            .iter()
            .map(|n| {
                let v = n.w * density(&n.x).abs();
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(FieldError::NonFinite { point: [n.x.x, n.x.y, n.x.z] })
                }
            })
            .sum()
    };
    let rows = t_grid
        .par_iter()
        .map(|&t| {
            let mut two = Vec::new();
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for &e in eps_grid {
                let lo = mass(t - e, t)?;
                let hi = mass(t, t + e)?;
                two.push(lo + hi);
                plus.push(hi);
                minus.push(lo);
            }
            Ok(sups(eps_grid, &two, &plus, &minus))
        })
        .collect::<Result<Vec<_>, SelectionError>>()?;
    let collar_mass = mass(0.0, 1.0)?;
    Ok(MaximalScan {
        direction: Direction::Tangential,
        t_grid: t_grid.to_vec(),
        epsilon_grid: eps_grid.to_vec(),
        values: rows.iter().map(|r| r.0).collect(),
        plus: rows.iter().map(|r| r.1).collect(),
        minus: rows.iter().map(|r| r.2).collect(),
        collar_mass,
    })
}

fn check_t_grid(t_grid: &[f64]) -> Result<(), GeometryError> {
    match t_grid.iter().find(|t| !(t.abs() < 0.5)) {
        Some(&t) => Err(GeometryError::OutOfRange { name: "t", value: t, range: "(-1/2, 1/2)" }),
        None => Ok(()),
    }
}

/// `n` midpoints of a uniform partition of `(−1/2, 1/2)`.
pub fn uniform_t_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -0.5 + (i as f64 + 0.5) / n as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GoodSetReport {
    pub lambda: f64,
    /// Parameters with `M(t) ≤ λ`.
    pub good: Vec<f64>,
    pub bad: Vec<f64>,
    /// Lebesgue measure of `{M > λ}` estimated by grid cells.
    pub complement_measure: f64,
    /// `10 |μ|(collar) / λ`.
    pub bound: f64,
    pub holds: bool,
}

/// Splits the scan at level `λ` and checks the weak-(1,1) estimate on the result.
pub fn good_set_scan(scan: &MaximalScan, lambda: f64) -> Result<GoodSetReport, SelectionError> {
    let h = match scan.t_grid.len() {
        0 => 0.0,
        1 => 1.0,
        _ => {
            let h = scan.t_grid[1] - scan.t_grid[0];
            if scan.t_grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300)) || h <= 0.0 {
                return Err(SelectionError::NonUniformGrid);
            }
            h
        }
    };
    let (good, bad): (Vec<_>, Vec<_>) =
        scan.t_grid.iter().copied().zip(scan.values.iter().copied()).partition(|&(_, m)| m <= lambda);
    let complement_measure = h * bad.len() as f64;
    let bound = 10.0 * scan.collar_mass / lambda;
    Ok(GoodSetReport {
        lambda,
        good: good.into_iter().map(|p| p.0).collect(),
        bad: bad.into_iter().map(|p| p.0).collect(),
        complement_measure,
        bound,
        holds: complement_measure <= bound,
    })
}

/// `|μ|(Φ({t} × Σ))`: only sheet parts lying on the shifted surface carry mass there.
pub fn single_layer_mass(
    mu: &CurlMeasure,
    manifold: &BoundaryManifold,
    collar: &TransversalCollar,
    t: f64,
    rule: &MeasureRule,
) -> Result<f64, SelectionError> {
    let set = shell(collar, manifold, t, t)?;
    let mut acc = 0.0;
    for sp in &mu.sheets {
        let q = sp.patch.rule(rule.sheet);
        for (node, w) in q.nodes.iter().zip(&q.weights) {
            let x = sp.patch.point(node[0], node[1]);
            if let Some((s, m)) = set.coords(&x) {
                if (s - t).abs() <= 1e-9 && m >= 0.0 {
                    acc += w * sp.patch.metric_jacobian(node[0], node[1]) * (sp.density)(&x).norm();
                }
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concentration_is_flagged() {
        let eps = [0.25, 0.125, 0.0625];
        assert_eq!(grid_sup(&eps, &[1.0, 1.0, 1.0]), f64::INFINITY);
        assert_eq!(grid_sup(&eps, &[0.5, 0.25, 0.125]), 2.0);
        assert_eq!(grid_sup(&eps, &[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn uniform_grid_cells() {
        let g = uniform_t_grid(4);
        assert_eq!(g, vec![-0.375, -0.125, 0.125, 0.375]);
    }
}
