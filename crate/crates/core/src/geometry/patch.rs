use super::quadrature::QuadratureRule;
use super::{GeometryError, Vec3};
use serde::Serialize;
use std::f64::consts::PI;

/// Right-handed orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frame {
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

impl Frame {
    /// Frame with `e3` along `n`; for `n = ±e3` the first axis is `e1`.
    pub fn from_normal(n: Vec3) -> Self {
        let e3 = n.normalize();
        let a = if e3.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let e1 = (a - e3 * a.dot(&e3)).normalize();
        let e2 = e3.cross(&e1);
        Self { e1, e2, e3 }
    }

    pub fn standard() -> Self {
        Self { e1: Vec3::x(), e2: Vec3::y(), e3: Vec3::z() }
    }

    fn radial(&self, v: f64) -> Vec3 {
        self.e1 * v.cos() + self.e2 * v.sin()
    }

    fn radial_dv(&self, v: f64) -> Vec3 {
        -self.e1 * v.sin() + self.e2 * v.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regularity {
    Lipschitz,
    C1,
    C2,
}

/// Canonical parametrized shapes. `u` is the collar direction, `v` the angle where periodic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Shape {
    /// Flat disk or annulus, `u = r ∈ [r0, r1]`.
    Disk { center: Vec3, frame: Frame, r0: f64, r1: f64 },
    /// Spherical zone, `u` = colatitude from `frame.e3` in `[b0, b1]`.
    Zone { center: Vec3, radius: f64, frame: Frame, b0: f64, b1: f64 },
    /// Lateral cylinder face, `u` = height along `frame.e3` in `[z0, z1]`.
    Tube { base: Vec3, radius: f64, frame: Frame, z0: f64, z1: f64 },
    /// Parallelogram `origin + u a + v b`, `(u, v) ∈ [0, 1]²`.
    Rect { origin: Vec3, a: Vec3, b: Vec3 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamDomain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub v_periodic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfacePatch {
    pub shape: Shape,
    /// Orientation relative to `∂_uX × ∂_vX`.
    pub sign: f64,
    pub regularity: Regularity,
}

impl SurfacePatch {
    pub fn disk(center: Vec3, radius: f64, normal: Vec3) -> Self {
        Self::annulus(center, 0.0, radius, normal)
    }

    pub fn annulus(center: Vec3, r0: f64, r1: f64, normal: Vec3) -> Self {
        Self {
            shape: Shape::Disk { center, frame: Frame::from_normal(normal), r0, r1 },
            sign: 1.0,
            regularity: Regularity::C2,
        }
    }

    pub fn sphere(center: Vec3, radius: f64, inward: bool) -> Self {
        Self::cap(center, radius, Vec3::z(), PI, inward)
    }

    /// Cap `{colatitude < alpha}` around `axis`.
    pub fn cap(center: Vec3, radius: f64, axis: Vec3, alpha: f64, inward: bool) -> Self {
        Self {
            shape: Shape::Zone { center, radius, frame: Frame::from_normal(axis), b0: 0.0, b1: alpha },
            sign: if inward { -1.0 } else { 1.0 },
            regularity: Regularity::C2,
        }
    }

    pub fn tube(base: Vec3, radius: f64, axis: Vec3, height: f64, inward: bool) -> Self {
        Self {
            shape: Shape::Tube { base, radius, frame: Frame::from_normal(axis), z0: 0.0, z1: height },
            sign: if inward { 1.0 } else { -1.0 },
            regularity: Regularity::C2,
        }
    }

    /// Parallelogram with normal along `a × b`.
    pub fn rect(origin: Vec3, a: Vec3, b: Vec3) -> Self {
        Self { shape: Shape::Rect { origin, a, b }, sign: 1.0, regularity: Regularity::C2 }
    }

    pub fn flipped(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    pub fn domain(&self) -> ParamDomain {
        match self.shape {
            Shape::Disk { r0, r1, .. } => ParamDomain { u: (r0, r1), v: (0.0, 2.0 * PI), v_periodic: true },
            Shape::Zone { b0, b1, .. } => ParamDomain { u: (b0, b1), v: (0.0, 2.0 * PI), v_periodic: true },
            Shape::Tube { z0, z1, .. } => ParamDomain { u: (z0, z1), v: (0.0, 2.0 * PI), v_periodic: true },
            Shape::Rect { .. } => ParamDomain { u: (0.0, 1.0), v: (0.0, 1.0), v_periodic: false },
        }
    }

    /// Same shape with the `u`-range replaced.
    pub fn with_u_range(&self, u0: f64, u1: f64) -> Self {
        let mut p = self.clone();
        match &mut p.shape {
            Shape::Disk { r0, r1, .. } => {
                *r0 = u0;
                *r1 = u1;
            }
            Shape::Zone { b0, b1, .. } => {
                *b0 = u0;
                *b1 = u1;
            }
            Shape::Tube { z0, z1, .. } => {
                *z0 = u0;
                *z1 = u1;
            }
            Shape::Rect { origin, a, b } => {
                // Rect has no u-range of its own: shrink along a.
                *origin += *a * u0;
                *a *= u1 - u0;
                let _ = b;
            }
        }
        p
    }

    pub fn point(&self, u: f64, v: f64) -> Vec3 {
        match &self.shape {
            Shape::Disk { center, frame, .. } => center + frame.radial(v) * u,
            Shape::Zone { center, radius, frame, .. } => {
                center + (frame.radial(v) * u.sin() + frame.e3 * u.cos()) * *radius
            }
            Shape::Tube { base, radius, frame, .. } => base + frame.radial(v) * *radius + frame.e3 * u,
            Shape::Rect { origin, a, b } => origin + a * u + b * v,
        }
    }

    /// Partial derivatives `(∂_uX, ∂_vX)`.
    pub fn tangents(&self, u: f64, v: f64) -> (Vec3, Vec3) {
        match &self.shape {
            Shape::Disk { frame, .. } => (frame.radial(v), frame.radial_dv(v) * u),
            Shape::Zone { radius, frame, .. } => {
                ((frame.radial(v) * u.cos() - frame.e3 * u.sin()) * *radius, frame.radial_dv(v) * (radius * u.sin()))
            }
            Shape::Tube { radius, frame, .. } => (frame.e3, frame.radial_dv(v) * *radius),
            Shape::Rect { a, b, .. } => (*a, *b),
        }
    }

    pub fn normal(&self, u: f64, v: f64) -> Vec3 {
        let n = match &self.shape {
            Shape::Disk { frame, .. } => frame.e3,
            Shape::Zone { frame, .. } => frame.radial(v) * u.sin() + frame.e3 * u.cos(),
            Shape::Tube { frame, .. } => -frame.radial(v),
            Shape::Rect { a, b, .. } => a.cross(b).normalize(),
        };
        n * self.sign
    }

    pub fn metric_jacobian(&self, u: f64, _v: f64) -> f64 {
        match &self.shape {
            Shape::Disk { .. } => u.abs(),
            Shape::Zone { radius, .. } => radius * radius * u.sin().abs(),
            Shape::Tube { radius, .. } => *radius,
            Shape::Rect { a, b, .. } => a.cross(b).norm(),
        }
    }

    /// Default product rule: GL × trapezoid on periodic shapes, GL × GL otherwise.
    pub fn rule(&self, n: usize) -> QuadratureRule {
        let d = self.domain();
        if d.v_periodic {
            QuadratureRule::gauss_trapezoid(n, 2 * n, d.u, d.v)
        } else {
            QuadratureRule::tensor(n, n, d.u, d.v)
        }
    }

    /// Tangential gradient from parameter derivatives `(f_u, f_v)`.
    pub fn tangential_gradient(&self, u: f64, v: f64, fu: f64, fv: f64) -> Vec3 {
        let (xu, xv) = self.tangents(u, v);
        let e = xu.dot(&xu);
        let f = xu.dot(&xv);
        let g = xv.dot(&xv);
        let det = e * g - f * f;
        if det <= 0.0 {
            return Vec3::zeros();
        }
        let a = (g * fu - f * fv) / det;
        let b = (e * fv - f * fu) / det;
        xu * a + xv * b
    }

    /// Parameters of the foot point of `x` on the underlying full surface.
    pub fn param_of(&self, x: &Vec3) -> (f64, f64) {
        let angle = |frame: &Frame, d: &Vec3| {
            let a = d.dot(&frame.e2).atan2(d.dot(&frame.e1));
            if a < 0.0 {
                a + 2.0 * PI
            } else {
                a
            }
        };
        match &self.shape {
            Shape::Disk { center, frame, .. } => {
                let d = x - center;
                let inplane = d - frame.e3 * d.dot(&frame.e3);
                (inplane.norm(), angle(frame, &d))
            }
            Shape::Zone { center, frame, .. } => {
                let d = x - center;
                let c = (d.dot(&frame.e3) / d.norm()).clamp(-1.0, 1.0);
                (c.acos(), angle(frame, &d))
            }
            Shape::Tube { base, frame, .. } => {
                let d = x - base;
                (d.dot(&frame.e3), angle(frame, &d))
            }
            Shape::Rect { origin, a, b } => {
                let d = x - origin;
                let (aa, ab, bb) = (a.dot(a), a.dot(b), b.dot(b));
                let (da, db) = (d.dot(a), d.dot(b));
                let det = aa * bb - ab * ab;
                ((bb * da - ab * db) / det, (aa * db - ab * da) / det)
            }
        }
    }

    /// Closest point on the underlying full surface (plane, sphere, cylinder).
    pub fn project(&self, x: &Vec3) -> Vec3 {
        match &self.shape {
            Shape::Disk { center, frame, .. } => x - frame.e3 * (x - center).dot(&frame.e3),
            Shape::Zone { center, radius, .. } => center + (x - center).normalize() * *radius,
            Shape::Tube { base, radius, frame, .. } => {
                let d = x - base;
                let h = d.dot(&frame.e3);
                let r = d - frame.e3 * h;
                base + frame.e3 * h + r.normalize() * *radius
            }
            Shape::Rect { origin, a, b } => {
                let n = a.cross(b).normalize();
                x - n * (x - origin).dot(&n)
            }
        }
    }

    /// Whether `(u, v)` lies in the parameter domain up to `tol`.
    pub fn contains_param(&self, u: f64, v: f64, tol: f64) -> bool {
        let d = self.domain();
        let in_u = u >= d.u.0 - tol && u <= d.u.1 + tol;
        let in_v = d.v_periodic || (v >= d.v.0 - tol && v <= d.v.1 + tol);
        in_u && in_v
    }

    /// Signed distance of `(u, v)` to the non-periodic, non-degenerate parameter edges.
    pub fn param_margin(&self, u: f64, v: f64) -> f64 {
        let d = self.domain();
        let mut m = d.u.1 - u;
        let degenerate_start = match self.shape {
            Shape::Disk { r0, .. } => r0 == 0.0,
            Shape::Zone { b0, .. } => b0 == 0.0,
            _ => false,
        };
        if !degenerate_start {
            m = m.min(u - d.u.0);
        }
        if !d.v_periodic {
            m = m.min(v - d.v.0).min(d.v.1 - v);
        }
        m
    }

    /// Whether `x` lies on the patch within `tol` in absolute position.
    pub fn contains_point(&self, x: &Vec3, tol: f64) -> bool {
        let (u, v) = self.param_of(x);
        let d = self.domain();
        let scale = match &self.shape {
            Shape::Zone { radius, .. } => *radius,
            Shape::Rect { a, b, .. } => a.norm().min(b.norm()),
            _ => 1.0,
        };
        (self.project(x) - x).norm() <= tol
            && u >= d.u.0 - tol / scale
            && u <= d.u.1 + tol / scale
            && (d.v_periodic || (v >= d.v.0 - tol / scale && v <= d.v.1 + tol / scale))
    }

    pub fn area(&self, n: usize) -> f64 {
        surface_integral(self, &|_| 1.0, &self.rule(n)).unwrap_or(f64::NAN)
    }
}

/// `Σ w_i f(X(u_i, v_i)) J(u_i, v_i)`; non-finite integrand values are reported with their node.
pub fn surface_integral(
    patch: &SurfacePatch,
    integrand: &dyn Fn(&Vec3) -> f64,
    rule: &QuadratureRule,
) -> Result<f64, GeometryError> {
    let mut acc = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let x = patch.point(node[0], node[1]);
        let val = integrand(&x);
        if !val.is_finite() {
            return Err(GeometryError::NonFinite { point: [x.x, x.y, x.z] });
        }
        acc += w * val * patch.metric_jacobian(node[0], node[1]);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fd_tangents(p: &SurfacePatch, u: f64, v: f64) -> (Vec3, Vec3) {
        let h = 1e-6;
        ((p.point(u + h, v) - p.point(u - h, v)) / (2.0 * h), (p.point(u, v + h) - p.point(u, v - h)) / (2.0 * h))
    }

    fn shapes() -> Vec<SurfacePatch> {
        vec![
            SurfacePatch::disk(Vec3::new(0.1, 0.2, 0.3), 1.5, Vec3::new(1.0, 2.0, -0.5)),
            SurfacePatch::cap(Vec3::zeros(), 2.0, Vec3::new(0.0, 1.0, 1.0), 1.0, true),
            SurfacePatch::tube(Vec3::zeros(), 0.7, Vec3::z(), 2.0, true),
            SurfacePatch::rect(Vec3::zeros(), Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.5, 1.0, 0.0)),
        ]
    }

    #[test]
    fn analytic_tangents_match_differences() {
        for p in shapes() {
            let d = p.domain();
            let u = 0.3 * d.u.0 + 0.7 * d.u.1;
            let v = 0.6 * d.v.0 + 0.4 * d.v.1;
            let (a, b) = p.tangents(u, v);
            let (fa, fb) = fd_tangents(&p, u, v);
            assert!((a - fa).norm() < 1e-8 && (b - fb).norm() < 1e-8);
            let cross = a.cross(&b);
            assert_abs_diff_eq!(cross.norm(), p.metric_jacobian(u, v), epsilon = 1e-12);
            let n = p.normal(u, v);
            assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!((cross.normalize() * p.sign - n).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn unit_disk_area_and_second_moment() {
        let p = SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z());
        let rule = p.rule(8);
        assert_abs_diff_eq!(surface_integral(&p, &|_| 1.0, &rule).unwrap(), PI, epsilon = 1e-10);
        let m = surface_integral(&p, &|x| x.x * x.x, &rule).unwrap();
        assert_abs_diff_eq!(m, PI / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_sphere_area_order_16() {
        let p = SurfacePatch::sphere(Vec3::zeros(), 1.0, true);
        let a = surface_integral(&p, &|_| 1.0, &p.rule(16)).unwrap();
        assert_abs_diff_eq!(a, 4.0 * PI, epsilon = 1e-8);
    }

    #[test]
    fn non_finite_integrand_reports_node() {
        let p = SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z());
        let err = surface_integral(&p, &|x| 1.0 / (x.x - x.x), &p.rule(2)).unwrap_err();
        assert!(matches!(err, GeometryError::NonFinite { .. }));
    }

    #[test]
    fn param_of_inverts_point() {
        for p in shapes() {
            let d = p.domain();
            let (u, v) = (0.4 * d.u.0 + 0.6 * d.u.1, 0.2 * d.v.0 + 0.8 * d.v.1);
            let (pu, pv) = p.param_of(&p.point(u, v));
            assert_abs_diff_eq!(pu, u, epsilon = 1e-12);
            assert_abs_diff_eq!(pv, v, epsilon = 1e-12);
            assert!(p.contains_point(&p.point(u, v), 1e-9));
        }
    }

    #[test]
    fn tangential_gradient_of_coordinate() {
        let p = SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z());
        // f = r has unit radial gradient.
        let g = p.tangential_gradient(0.5, 0.3, 1.0, 0.0);
        assert_abs_diff_eq!((g - Vec3::new(0.3f64.cos(), 0.3f64.sin(), 0.0)).norm(), 0.0, epsilon = 1e-14);
    }
}
