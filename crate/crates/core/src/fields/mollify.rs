use super::measure::{sheet_integral, CurlMeasure, MeasureRule, MeasureSet};
use super::VectorField;
use crate::geometry::quadrature::{trapezoid_periodic, GaussLegendre};
use crate::geometry::{Vec3, VolumeNode};
use std::f64::consts::PI;
use std::sync::Arc;

/// `ρ(x) = 105/(32π) (1 − |x|²)²` on the unit ball; unit mass, radially symmetric.
pub fn mollifier_3d(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        105.0 / (32.0 * PI) * (1.0 - r2) * (1.0 - r2)
    }
}

/// Unit-ball nodes `z` with weights `w ρ(z)`.
fn stencil(order: usize) -> Vec<(Vec3, f64)> {
    let g = GaussLegendre::new(order);
    let mut out = Vec::new();
    for (r, wr) in g.on(0.0, 1.0) {
        for (c, wc) in g.on(-1.0, 1.0) {
            let sb = (1.0 - c * c).sqrt();
            for (p, wp) in trapezoid_periodic(2 * order, 0.0, 2.0 * PI) {
                let z = Vec3::new(sb * p.cos(), sb * p.sin(), c) * r;
                out.push((z, wr * wc * wp * r * r * mollifier_3d(r * r)));
            }
        }
    }
    out
}

struct Ball {
    center: Vec3,
    radius: f64,
}

impl MeasureSet for Ball {
    fn volume_nodes(&self, _n: usize) -> Vec<VolumeNode> {
        Vec::new()
    }
    fn levels(&self, x: &Vec3) -> Vec<f64> {
        vec![self.radius - (x - self.center).norm()]
    }
    fn contains(&self, x: &Vec3) -> bool {
        (x - self.center).norm() < self.radius
    }
}

/// `F_δ = ρ_δ ∗ F`; when `mu` is given, the analytic curl is `ρ_δ ∗ μ`.
pub fn mollify(field: &VectorField, mu: Option<&CurlMeasure>, delta: f64, order: usize) -> VectorField {
    let st = Arc::new(stencil(order));
    let f = field.clone();
    let s1 = st.clone();
    let mut out = VectorField::new(format!("{}*rho", field.name), move |x| {
        s1.iter().map(|(z, w)| f.eval(&(x - z * delta)) * *w).sum()
    });
    if let Some(mu) = mu {
        let mu = mu.clone();
        let s2 = st.clone();
        let rule = MeasureRule { sheet: order.max(8), line: 8, ..MeasureRule::default() };
        out = out.with_curl(move |x| {
            let mut acc = Vec3::zeros();
            if let Some(rho) = &mu.lebesgue {
                acc += s2.iter().map(|(z, w)| rho(&(x - z * delta)) * *w).sum::<Vec3>();
            }
            let kernel = |y: &Vec3| mollifier_3d((x - y).norm_squared() / (delta * delta)) / delta.powi(3);
            for l in &mu.lines {
                let d = l.b - l.a;
                let len = d.norm();
                let q = l.a - x;
                let (qa, qb, qc) = (d.dot(&d), 2.0 * q.dot(&d), q.dot(&q) - delta * delta);
                let disc = qb * qb - 4.0 * qa * qc;
                if disc <= 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                let lo = ((-qb - sq) / (2.0 * qa)).max(0.0);
                let hi = ((-qb + sq) / (2.0 * qa)).min(1.0);
                if hi <= lo {
                    continue;
                }
                for (t, w) in GaussLegendre::new(rule.line).on(lo, hi) {
                    let y = l.a + d * t;
                    acc += (l.density)(&y) * (w * len * kernel(&y));
                }
            }
            let ball = Ball { center: *x, radius: delta };
            for s in &mu.sheets {
                for k in 0..3 {
                    acc[k] +=
                        sheet_integral(&s.patch, &|y| (s.density)(y)[k] * kernel(y), &ball, &rule).unwrap_or(f64::NAN);
                }
            }
            acc
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stencil_has_unit_mass() {
        let m: f64 = stencil(6).iter().map(|s| s.1).sum();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn constant_field_is_unchanged() {
        let c = Vec3::new(1.0, -2.0, 0.5);
        let m = mollify(&VectorField::constant(c), None, 0.1, 6);
        assert_abs_diff_eq!((m.eval(&Vec3::new(0.3, 0.2, 0.1)) - c).norm(), 0.0, epsilon = 1e-13);
    }
}
