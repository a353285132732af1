use super::{finite_or, FieldError, VecFn};
use crate::geometry::clip::clip_intervals;
use crate::geometry::quadrature::{trapezoid_periodic, GaussLegendre};
use crate::geometry::{SolidRegion, SurfacePatch, Vec3, VolumeNode};
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

/// Vector density on a surface patch, measured against `H²`.
#[derive(Clone)]
pub struct SheetPart {
    pub patch: SurfacePatch,
    pub density: VecFn,
}

/// Vector density on the segment `[a, b]`, measured against `H¹`.
#[derive(Clone)]
pub struct LinePart {
    pub a: Vec3,
    pub b: Vec3,
    pub density: VecFn,
}

/// `curl F = ρ L³ + Σ σ_k H²⌞S_k + Σ λ_k H¹⌞L_k`.
#[derive(Clone, Default)]
pub struct CurlMeasure {
    pub lebesgue: Option<VecFn>,
    pub sheets: Vec<SheetPart>,
    pub lines: Vec<LinePart>,
}

impl fmt::Debug for CurlMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurlMeasure")
            .field("lebesgue", &self.lebesgue.is_some())
            .field("sheets", &self.sheets.len())
            .field("lines", &self.lines.len())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeasureRule {
    pub volume: usize,
    pub sheet: usize,
    pub line: usize,
    /// Grid used to locate support/set boundary crossings before bisection.
    pub clip_grid: usize,
}

impl Default for MeasureRule {
    fn default() -> Self {
        Self { volume: 16, sheet: 32, line: 32, clip_grid: 64 }
    }
}

/// A set the measure can be restricted to.
pub trait MeasureSet: Sync {
    fn volume_nodes(&self, n: usize) -> Vec<VolumeNode>;
    /// Continuous functions whose sign changes contain the set boundary.
    fn levels(&self, x: &Vec3) -> Vec<f64>;
    fn contains(&self, x: &Vec3) -> bool;

    fn clip_segment(&self, p: &Vec3, d: &Vec3, lo: f64, hi: f64, grid: usize) -> Vec<(f64, f64)> {
        clip_intervals(lo, hi, grid, &|l| self.levels(&(p + d * l)), &|l| self.contains(&(p + d * l)))
    }
}

impl MeasureSet for SolidRegion {
    fn volume_nodes(&self, n: usize) -> Vec<VolumeNode> {
        SolidRegion::volume_nodes(self, n)
    }
    fn levels(&self, x: &Vec3) -> Vec<f64> {
        SolidRegion::levels(self, x)
    }
    fn contains(&self, x: &Vec3) -> bool {
        SolidRegion::contains(self, x)
    }
    fn clip_segment(&self, p: &Vec3, d: &Vec3, lo: f64, hi: f64, _grid: usize) -> Vec<(f64, f64)> {
        SolidRegion::clip_segment(self, p, d, lo, hi)
    }
}

type Pairing<'a> = &'a (dyn Fn(&Vec3, &Vec3) -> f64 + Sync);

impl CurlMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.lebesgue.is_none() && self.sheets.is_empty() && self.lines.is_empty()
    }

    pub fn lebesgue(mut self, f: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        self.lebesgue = Some(Arc::new(f));
        self
    }

    pub fn sheet(mut self, patch: SurfacePatch, f: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        self.sheets.push(SheetPart { patch, density: Arc::new(f) });
        self
    }

    pub fn line(mut self, a: Vec3, b: Vec3, f: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        self.lines.push(LinePart { a, b, density: Arc::new(f) });
        self
    }

    /// `∫_S g(x, dμ/d|·|)` over all parts restricted to `set`.
    pub fn integrate<S: MeasureSet + ?Sized>(
        &self,
        set: &S,
        g: Pairing<'_>,
        rule: &MeasureRule,
    ) -> Result<f64, FieldError> {
        let mut acc = 0.0;
        if let Some(rho) = &self.lebesgue {
            acc += set
                .volume_nodes(rule.volume)
                .par_iter()
                .map(|n| finite_or(&n.x, n.w * g(&n.x, &rho(&n.x))))
                .sum::<Result<f64, FieldError>>()?;
        }
        for s in &self.sheets {
            acc += sheet_integral(&s.patch, &|x| g(x, &(s.density)(x)), set, rule)?;
        }
        for l in &self.lines {
            acc += line_integral(l, &|x| g(x, &(l.density)(x)), set, rule)?;
        }
        Ok(acc)
    }

    /// Parts lying on `∂U`: sheets whose nodes sit on the boundary patches.
    pub fn integrate_on_boundary(
        &self,
        region: &SolidRegion,
        g: Pairing<'_>,
        rule: &MeasureRule,
    ) -> Result<f64, FieldError> {
        let mut acc = 0.0;
        for s in &self.sheets {
            let q = s.patch.rule(rule.sheet);
            for (node, w) in q.nodes.iter().zip(&q.weights) {
                let x = s.patch.point(node[0], node[1]);
                if region.on_boundary(&x, 1e-9) {
                    let val = w * s.patch.metric_jacobian(node[0], node[1]) * g(&x, &(s.density)(&x));
                    acc += finite_or(&x, val)?;
                }
            }
        }
        Ok(acc)
    }
}

/// `∫_{S ∩ set} f dH²`, clipping each constant-`v` line exactly.
pub fn sheet_integral<S: MeasureSet + ?Sized>(
    patch: &SurfacePatch,
    f: &(dyn Fn(&Vec3) -> f64 + Sync),
    set: &S,
    rule: &MeasureRule,
) -> Result<f64, FieldError> {
    let d = patch.domain();
    let vs: Vec<(f64, f64)> = if d.v_periodic {
        trapezoid_periodic(2 * rule.sheet, d.v.0, d.v.1 - d.v.0)
    } else {
        GaussLegendre::new(rule.sheet).on(d.v.0, d.v.1).collect()
    };
    let g = GaussLegendre::new(rule.sheet);
    vs.par_iter()
        .map(|&(v, wv)| {
            let pieces = clip_intervals(d.u.0, d.u.1, rule.clip_grid, &|u| set.levels(&patch.point(u, v)), &|u| {
                set.contains(&patch.point(u, v))
            });
            let mut acc = 0.0;
            for (a, b) in pieces {
                for (u, wu) in g.on(a, b) {
                    let x = patch.point(u, v);
                    acc += finite_or(&x, wu * wv * patch.metric_jacobian(u, v) * f(&x))?;
                }
            }
            Ok(acc)
        })
        .sum()
}

/// `∫_{L ∩ set} f dH¹`.
pub fn line_integral<S: MeasureSet + ?Sized>(
    line: &LinePart,
    f: &dyn Fn(&Vec3) -> f64,
    set: &S,
    rule: &MeasureRule,
) -> Result<f64, FieldError> {
    let d = line.b - line.a;
    let len = d.norm();
    let g = GaussLegendre::new(rule.line);
    let mut acc = 0.0;
    for (a, b) in set.clip_segment(&line.a, &d, 0.0, 1.0, 4 * rule.clip_grid) {
        for (l, w) in g.on(a, b) {
            let x = line.a + d * l;
            acc += finite_or(&x, w * len * f(&x))?;
        }
    }
    Ok(acc)
}

/// `∫_U φ · d(curl F)`.
pub fn integrate_measure(
    mu: &CurlMeasure,
    testfn: &(dyn Fn(&Vec3) -> Vec3 + Sync),
    region: &SolidRegion,
    rule: &MeasureRule,
) -> Result<f64, FieldError> {
    mu.integrate(region, &|x, d| testfn(x).dot(d), rule)
}

/// `∫_{∂U} φ · d(curl F)`.
pub fn integrate_measure_on_boundary(
    mu: &CurlMeasure,
    testfn: &(dyn Fn(&Vec3) -> Vec3 + Sync),
    region: &SolidRegion,
    rule: &MeasureRule,
) -> Result<f64, FieldError> {
    mu.integrate_on_boundary(region, &|x, d| testfn(x).dot(d), rule)
}

/// `|curl F|(set)`.
pub fn total_variation<S: MeasureSet + ?Sized>(
    mu: &CurlMeasure,
    set: &S,
    rule: &MeasureRule,
) -> Result<f64, FieldError> {
    mu.integrate(set, &|_, d| d.norm(), rule)
}
