use super::patch::SurfacePatch;
use super::quadrature::{trapezoid_periodic, GaussLegendre};
use super::{GeometryError, Vec3};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    U,
    V,
}

/// A side of the parameter rectangle; `inward` is `+1` when the patch lies at larger parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub axis: Axis,
    pub value: f64,
    pub inward: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CurveNode {
    pub s: f64,
    pub x: Vec3,
    /// Arclength weight.
    pub w: f64,
    pub normal: Vec3,
    pub conormal: Vec3,
    pub tau: Vec3,
}

/// One boundary component of a patch, parametrized by the free parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub patch: SurfacePatch,
    pub edge: Edge,
}

impl Curve {
    pub fn range(&self) -> (f64, f64, bool) {
        let d = self.patch.domain();
        match self.edge.axis {
            Axis::U => (d.v.0, d.v.1, d.v_periodic),
            Axis::V => (d.u.0, d.u.1, false),
        }
    }

    fn uv(&self, s: f64) -> (f64, f64) {
        match self.edge.axis {
            Axis::U => (self.edge.value, s),
            Axis::V => (s, self.edge.value),
        }
    }

    pub fn point(&self, s: f64) -> Vec3 {
        let (u, v) = self.uv(s);
        self.patch.point(u, v)
    }

    pub fn velocity(&self, s: f64) -> Vec3 {
        let (u, v) = self.uv(s);
        let (xu, xv) = self.patch.tangents(u, v);
        match self.edge.axis {
            Axis::U => xv,
            Axis::V => xu,
        }
    }

    pub fn normal(&self, s: f64) -> Vec3 {
        let (u, v) = self.uv(s);
        self.patch.normal(u, v)
    }

    /// Unit conormal tangent to the patch and pointing into it.
    pub fn conormal(&self, s: f64) -> Vec3 {
        let (u, v) = self.uv(s);
        let (xu, xv) = self.patch.tangents(u, v);
        let w = match self.edge.axis {
            Axis::U => xu,
            Axis::V => xv,
        } * self.edge.inward;
        let t = self.velocity(s);
        let n = self.patch.normal(u, v);
        let mut c = w - n * w.dot(&n);
        let tn = t.norm();
        if tn > 0.0 {
            let th = t / tn;
            c -= th * c.dot(&th);
        }
        c.normalize()
    }

    /// `τ_Γ = ν_Σ × ν_Γ`.
    pub fn tau(&self, s: f64) -> Vec3 {
        self.normal(s).cross(&self.conormal(s))
    }

    pub fn nodes(&self, n: usize) -> Vec<CurveNode> {
        let (a, b, periodic) = self.range();
        let params: Vec<(f64, f64)> =
            if periodic { trapezoid_periodic(n, a, b - a) } else { GaussLegendre::new(n).on(a, b).collect() };
        params
            .into_iter()
            .map(|(s, w)| {
                let speed = self.velocity(s).norm();
                let (normal, conormal) =
                    if speed > 0.0 { (self.normal(s), self.conormal(s)) } else { (self.normal(s), Vec3::zeros()) };
                CurveNode { s, x: self.point(s), w: w * speed, normal, conormal, tau: normal.cross(&conormal) }
            })
            .collect()
    }

    pub fn length(&self, n: usize) -> f64 {
        self.nodes(n).iter().map(|c| c.w).sum()
    }
}

/// `Σ ⊂ ∂Ω′` together with its boundary curve `Γ_Σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryManifold {
    pub patch: SurfacePatch,
    pub boundary: Vec<Curve>,
}

impl BoundaryManifold {
    pub fn new(patch: SurfacePatch) -> Self {
        let d = patch.domain();
        let mut edges =
            vec![Edge { axis: Axis::U, value: d.u.0, inward: 1.0 }, Edge { axis: Axis::U, value: d.u.1, inward: -1.0 }];
        if !d.v_periodic {
            edges.push(Edge { axis: Axis::V, value: d.v.0, inward: 1.0 });
            edges.push(Edge { axis: Axis::V, value: d.v.1, inward: -1.0 });
        }
        let boundary = edges
            .into_iter()
            .map(|edge| Curve { patch: patch.clone(), edge })
            .filter(|c| c.length(8) > 1e-12)
            .collect();
        Self { patch, boundary }
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn boundary_nodes(&self, n: usize) -> Vec<CurveNode> {
        self.boundary.iter().flat_map(|c| c.nodes(n)).collect()
    }

    pub fn boundary_length(&self, n: usize) -> f64 {
        self.boundary.iter().map(|c| c.length(n)).sum()
    }
}

/// Arclength integral over the given curves; zero for degenerate curves.
pub fn line_integral(curves: &[Curve], integrand: &dyn Fn(&Vec3) -> f64, n: usize) -> Result<f64, GeometryError> {
    let mut acc = 0.0;
    for c in curves {
        for node in c.nodes(n) {
            if node.w == 0.0 {
                continue;
            }
            let val = integrand(&node.x);
            if !val.is_finite() {
                return Err(GeometryError::NonFinite { point: [node.x.x, node.x.y, node.x.z] });
            }
            acc += node.w * val;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn unit_circle_integrals() {
        let m = BoundaryManifold::new(SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z()));
        assert_eq!(m.boundary.len(), 1);
        assert_abs_diff_eq!(line_integral(&m.boundary, &|_| 1.0, 32).unwrap(), 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(line_integral(&m.boundary, &|x| x.x * x.x, 32).unwrap(), PI, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_curve_integrates_to_zero() {
        let c = Curve {
            patch: SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z()),
            edge: Edge { axis: Axis::U, value: 0.0, inward: 1.0 },
        };
        assert_eq!(line_integral(&[c], &|_| 1.0, 16).unwrap(), 0.0);
    }

    #[test]
    fn disk_orientation_convention() {
        let m = BoundaryManifold::new(SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z()));
        let c = &m.boundary[0];
        // s = 0 is the point (1, 0, 0).
        assert_abs_diff_eq!((c.point(0.0) - Vec3::x()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((c.conormal(0.0) + Vec3::x()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((c.tau(0.0) + Vec3::y()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn right_hand_rule_on_all_shapes() {
        let patches = vec![
            SurfacePatch::annulus(Vec3::zeros(), 0.5, 1.0, Vec3::new(0.0, 1.0, 1.0)),
            SurfacePatch::cap(Vec3::zeros(), 1.0, Vec3::z(), 1.2, true),
            SurfacePatch::tube(Vec3::zeros(), 1.0, Vec3::z(), 1.0, true),
            SurfacePatch::rect(Vec3::zeros(), Vec3::x(), Vec3::y()),
        ];
        for p in patches {
            let m = BoundaryManifold::new(p);
            for node in m.boundary_nodes(12) {
                assert!(node.conormal.dot(&node.normal).abs() < 1e-12);
                let r = (node.tau - node.normal.cross(&node.conormal)).norm();
                assert!(r <= 1e-10);
                assert!((m.patch.project(&node.x) - node.x).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn closed_sphere_has_no_boundary() {
        let m = BoundaryManifold::new(SurfacePatch::sphere(Vec3::zeros(), 1.0, true));
        assert!(m.is_closed());
    }
}
