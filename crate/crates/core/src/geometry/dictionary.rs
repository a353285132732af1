use super::patch::{Shape, SurfacePatch};
use super::Vec3;
use std::fmt;
use std::sync::Arc;

type Scalar = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;
type Vector = Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;

/// Smooth ambient function with its analytic gradient, used as a probe on surfaces.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    f: Scalar,
    grad: Vector,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name).finish()
    }
}

impl TestFunction {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), f: Arc::new(f), grad: Arc::new(grad) }
    }

    pub fn constant(c: f64) -> Self {
        Self::new("constant", move |_| c, |_| Vec3::zeros())
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        (self.f)(x)
    }

    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        (self.grad)(x)
    }

    /// Gradient projected onto the tangent plane with unit normal `n`.
    pub fn tangential_gradient(&self, x: &Vec3, n: &Vec3) -> Vec3 {
        let g = self.gradient(x);
        g - n * g.dot(n)
    }

    pub fn as_fn(&self) -> Scalar {
        self.f.clone()
    }
}

/// Cubic B-spline on `[-2, 2]` and its derivative.
pub fn bspline3(s: f64) -> (f64, f64) {
    let a = s.abs();
    let sg = s.signum();
    if a >= 2.0 {
        (0.0, 0.0)
    } else if a >= 1.0 {
        let q = 2.0 - a;
        (q * q * q / 6.0, -sg * q * q / 2.0)
    } else {
        (2.0 / 3.0 - a * a + 0.5 * a * a * a, sg * (-2.0 * a + 1.5 * a * a))
    }
}

/// Tensor B-spline bump of half-width `2h` centered at `c`, scaled to peak value one.
pub fn bspline_bump(c: Vec3, h: f64) -> TestFunction {
    let peak = (2.0f64 / 3.0).powi(3);
    let eval = move |x: &Vec3| {
        let d = (x - c) / h;
        let (bx, _) = bspline3(d.x);
        let (by, _) = bspline3(d.y);
        let (bz, _) = bspline3(d.z);
        bx * by * bz / peak
    };
    let grad = move |x: &Vec3| {
        let d = (x - c) / h;
        let (bx, dx) = bspline3(d.x);
        let (by, dy) = bspline3(d.y);
        let (bz, dz) = bspline3(d.z);
        Vec3::new(dx * by * bz, bx * dy * bz, bx * by * dz) / (h * peak)
    };
    TestFunction::new(format!("bump(h={h:.4})"), eval, grad)
}

/// Real spherical harmonics of degree at most two in `(x − c)/R`, with unit sup on the sphere.
pub fn harmonics(c: Vec3, r: f64) -> Vec<TestFunction> {
    type Poly = (fn(&Vec3) -> f64, fn(&Vec3) -> Vec3, f64, &'static str);
    let polys: [Poly; 9] = [
        (|_| 1.0, |_| Vec3::zeros(), 1.0, "Y00"),
        (|y| y.x, |_| Vec3::x(), 1.0, "Y1x"),
        (|y| y.y, |_| Vec3::y(), 1.0, "Y1y"),
        (|y| y.z, |_| Vec3::z(), 1.0, "Y1z"),
        (|y| y.x * y.y, |y| Vec3::new(y.y, y.x, 0.0), 0.5, "Y2xy"),
        (|y| y.y * y.z, |y| Vec3::new(0.0, y.z, y.y), 0.5, "Y2yz"),
        (|y| y.x * y.z, |y| Vec3::new(y.z, 0.0, y.x), 0.5, "Y2xz"),
        (|y| y.x * y.x - y.y * y.y, |y| Vec3::new(2.0 * y.x, -2.0 * y.y, 0.0), 1.0, "Y2xx"),
        (|y| 3.0 * y.z * y.z - 1.0, |y| Vec3::new(0.0, 0.0, 6.0 * y.z), 2.0, "Y2zz"),
    ];
    polys
        .iter()
        .map(|&(f, g, sup, name)| {
            TestFunction::new(name, move |x| f(&((x - c) / r)) / sup, move |x| g(&((x - c) / r)) / (sup * r))
        })
        .collect()
}

/// Bumps at three scales centered on patch nodes, plus harmonics on spherical patches.
pub fn dictionary(patch: &SurfacePatch) -> Vec<TestFunction> {
    let size = patch.area(12).sqrt();
    let mut out = Vec::new();
    for k in 0..3 {
        let h = size * 0.25 * 0.5f64.powi(k);
        let rule = patch.rule(k as usize + 1);
        for node in &rule.nodes {
            out.push(bspline_bump(patch.point(node[0], node[1]), h));
        }
    }
    if let Shape::Zone { center, radius, .. } = patch.shape {
        out.extend(harmonics(center, radius));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bspline_partition_and_gradient() {
        let s: f64 = (-3..=3).map(|k| bspline3(0.3 - k as f64).0).sum();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-14);
        let b = bspline_bump(Vec3::new(0.1, 0.2, 0.0), 0.3);
        let x = Vec3::new(0.25, 0.1, 0.05);
        let h = 1e-6;
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            let fd = (b.eval(&(x + e)) - b.eval(&(x - e))) / (2.0 * h);
            assert_abs_diff_eq!(fd, b.gradient(&x)[i], epsilon = 1e-7);
        }
        assert_abs_diff_eq!(b.eval(&Vec3::new(0.1, 0.2, 0.0)), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sphere_dictionary_has_harmonics() {
        let d = dictionary(&SurfacePatch::sphere(Vec3::zeros(), 1.0, true));
        assert!(d.iter().any(|t| t.name == "Y2zz"));
        for t in &d {
            for &x in &[Vec3::x(), Vec3::z(), Vec3::new(0.6, 0.0, 0.8)] {
                assert!(t.eval(&x).abs() <= 1.0 + 1e-12);
            }
        }
    }
}
