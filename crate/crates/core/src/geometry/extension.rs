use super::patch::{Frame, SurfacePatch};
use super::quadrature::{trapezoid_periodic, GaussLegendre};
use super::{GeometryError, Vec3};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type Scalar = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;

/// Cutoff: `1` on `[0, 1/2]`, `0` on `[1, ∞)`, quintic smoothstep between; `|θ′| ≤ 15/4`.
pub fn theta(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let x = 2.0 * t - 1.0;
        1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

/// Planar mollifier `(3/π)(1 − |z|²)²` on the unit disk.
pub fn mollifier_2d(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        3.0 / PI * (1.0 - r2) * (1.0 - r2)
    }
}

/// `f_δ(x) = θ(d/δ) ∫ ρ(z) f(π(x̂ + d(z₁T₁ + z₂T₂))) dz` with `d` the depth below the patch.
#[derive(Clone)]
pub struct Extension {
    pub patch: SurfacePatch,
    pub delta: f64,
    f: Scalar,
    stencil: Vec<([f64; 2], f64)>,
}

impl fmt::Debug for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Extension")
            .field("patch", &self.patch)
            .field("delta", &self.delta)
            .field("stencil", &self.stencil.len())
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GradientReport {
    pub sup_gradient: f64,
    pub sup_tangential: f64,
    pub sup_value: f64,
    /// Smallest `c` with `‖∇f_δ‖ ≤ c(‖∇_τf‖ + ‖f‖/δ)` on the samples.
    pub constant: f64,
}

/// Minimal stencil order for the mollifier quadrature.
const MIN_ORDER: usize = 3;

pub fn extend_boundary_function(
    patch: &SurfacePatch,
    f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
    delta: f64,
    order: usize,
) -> Result<Extension, GeometryError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(GeometryError::OutOfRange { name: "delta", value: delta, range: "(0, 1)" });
    }
    if order < MIN_ORDER {
        return Err(GeometryError::TooCoarse(format!("mollifier stencil order {order} < {MIN_ORDER}")));
    }
    let g = GaussLegendre::new(order);
    let mut stencil = Vec::new();
    for (r, wr) in g.on(0.0, 1.0) {
        for (a, wa) in trapezoid_periodic(2 * order, 0.0, 2.0 * PI) {
            stencil.push(([r * a.cos(), r * a.sin()], wr * wa * r * mollifier_2d(r * r)));
        }
    }
    Ok(Extension { patch: patch.clone(), delta, f: Arc::new(f), stencil })
}

impl Extension {
    /// Foot point, depth along the inward normal and tangent frame at the foot.
    fn local(&self, x: &Vec3) -> (Vec3, f64, Frame) {
        let foot = self.patch.project(x);
        let (u, v) = self.patch.param_of(&foot);
        let n = self.patch.normal(u, v);
        (foot, (x - foot).dot(&n), Frame::from_normal(n))
    }

    pub fn boundary_value(&self, x: &Vec3) -> f64 {
        (self.f)(x)
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        let (foot, d, frame) = self.local(x);
        let cut = theta(d.abs() / self.delta);
        if cut == 0.0 {
            return 0.0;
        }
        if d == 0.0 {
            return (self.f)(&foot);
        }
        let avg: f64 = self
            .stencil
            .iter()
            .map(|(z, w)| {
                let y = foot + (frame.e1 * z[0] + frame.e2 * z[1]) * d;
                w * (self.f)(&self.patch.project(&y))
            })
            .sum();
        cut * avg
    }

    pub fn gradient(&self, x: &Vec3, h: f64) -> Vec3 {
        let mut g = Vec3::zeros();
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            g[i] = (self.eval(&(x + e)) - self.eval(&(x - e))) / (2.0 * h);
        }
        g
    }

    /// Sup norms over patch nodes and `n` depths in `(0, δ)`.
    pub fn gradient_report(&self, n: usize) -> GradientReport {
        let h = 1e-4 * self.delta;
        let rule = self.patch.rule(n);
        let g = GaussLegendre::new(n);
        let (mut sg, mut st, mut sv) = (0.0f64, 0.0f64, 0.0f64);
        for node in &rule.nodes {
            let (u, v) = (node[0], node[1]);
            let x = self.patch.point(u, v);
            let n0 = self.patch.normal(u, v);
            let fr = Frame::from_normal(n0);
            sv = sv.max((self.f)(&x).abs());
            let dt = |e: Vec3| {
                let p = self.patch.project(&(x + e * h));
                let m = self.patch.project(&(x - e * h));
                ((self.f)(&p) - (self.f)(&m)) / (2.0 * h)
            };
            st = st.max(dt(fr.e1).hypot(dt(fr.e2)));
            for (d, _) in g.on(0.0, self.delta) {
                sg = sg.max(self.gradient(&(x + n0 * d), h).norm());
            }
        }
        let denom = st + sv / self.delta;
        GradientReport {
            sup_gradient: sg,
            sup_tangential: st,
            sup_value: sv,
            constant: if denom > 0.0 { sg / denom } else { 0.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn face() -> SurfacePatch {
        SurfacePatch::disk(Vec3::zeros(), 2.0, Vec3::z())
    }

    #[test]
    fn theta_shape() {
        assert_eq!(theta(0.2), 1.0);
        assert_eq!(theta(1.3), 0.0);
        assert_abs_diff_eq!(theta(0.75), 0.5, epsilon = 1e-15);
        let sup = (1..1000)
            .map(|i| {
                let t = 0.5 + 0.5 * i as f64 / 1000.0;
                ((theta(t + 1e-7) - theta(t - 1e-7)) / 2e-7).abs()
            })
            .fold(0.0, f64::max);
        assert!(sup <= 3.75 + 1e-6);
    }

    #[test]
    fn mollifier_has_unit_mass() {
        let e = extend_boundary_function(&face(), |_| 1.0, 0.2, 6).unwrap();
        let m: f64 = e.stencil.iter().map(|s| s.1).sum();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn constant_data_gives_exact_ramp() {
        let e = extend_boundary_function(&face(), |_| 1.0, 0.2, 6).unwrap();
        for &z in &[0.0, 0.05, 0.12, 0.17, 0.25] {
            let x = Vec3::new(0.3, -0.1, z);
            assert_abs_diff_eq!(e.eval(&x), theta(z / 0.2), epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_coarse_stencil() {
        assert!(matches!(extend_boundary_function(&face(), |_| 1.0, 0.2, 2), Err(GeometryError::TooCoarse(_))));
    }
}
