use super::manifold::{Axis, BoundaryManifold, Curve};
use super::patch::{Shape, SurfacePatch};
use super::quadrature::{split_points, trapezoid_periodic, GaussLegendre};
use super::{GeometryError, Vec3};
use serde::Serialize;

/// Declared jump locations of a surface field, used to split the collar quadrature.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub enum Breaks {
    #[default]
    None,
    /// Jumps across circles of the given radii around `center`.
    Radii { center: Vec3, radii: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CollarKind {
    /// `Γ = ∅`; every height function is identically one.
    Empty,
    /// `s(u) = min_e inward_e (u − u_e) / L_e` over constant-`u` edges.
    Strip { edges: Vec<(f64, f64, f64)> },
    /// Central scaling of a parallelogram, `s = 2 min(u, 1 − u, v, 1 − v)`.
    Scaled,
}

/// Quadrature node in a collar band with the tangential gradient of the collar parameter.
#[derive(Debug, Clone, Copy)]
pub struct BandNode {
    pub u: f64,
    pub v: f64,
    pub s: f64,
    pub x: Vec3,
    /// Area weight.
    pub w: f64,
    pub grad_s: Vec3,
    pub normal: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentialCollar {
    pub manifold: BoundaryManifold,
    pub kind: CollarKind,
    /// Comparability constant, at least 2.
    pub theta: f64,
    /// Largest ratio observed on the sample grid.
    pub theta_fit: f64,
    /// `sup |∇_τ s|`, the Lipschitz constant of the collar parameter.
    pub lipschitz: f64,
}

pub fn build_tangential_collar(manifold: &BoundaryManifold) -> Result<TangentialCollar, GeometryError> {
    if manifold.patch.area(8) <= 1e-14 {
        return Err(GeometryError::Degenerate("patch has zero area".into()));
    }
    let kind = if manifold.is_closed() {
        CollarKind::Empty
    } else if manifold.boundary.iter().all(|c| c.edge.axis == Axis::U) {
        let d = manifold.patch.domain();
        let width = d.u.1 - d.u.0;
        let n = manifold.boundary.len();
        let scale = if n == 1 { width } else { 0.5 * width };
        CollarKind::Strip { edges: manifold.boundary.iter().map(|c| (c.edge.value, c.edge.inward, scale)).collect() }
    } else if matches!(manifold.patch.shape, Shape::Rect { .. }) && manifold.boundary.len() == 4 {
        CollarKind::Scaled
    } else {
        return Err(GeometryError::Degenerate("boundary has a zero-length component".into()));
    };
    let mut collar = TangentialCollar { manifold: manifold.clone(), kind, theta: 2.0, theta_fit: 1.0, lipschitz: 0.0 };
    if collar.kind != CollarKind::Empty {
        collar.theta_fit = collar.fit_theta();
        collar.theta = collar.theta_fit.max(2.0);
        collar.lipschitz = collar.fit_lipschitz();
    }
    Ok(collar)
}

impl TangentialCollar {
    pub fn patch(&self) -> &SurfacePatch {
        &self.manifold.patch
    }

    /// Collar parameter of the point with parameters `(u, v)`.
    pub fn level(&self, u: f64, v: f64) -> f64 {
        match &self.kind {
            CollarKind::Empty => f64::INFINITY,
            CollarKind::Strip { edges } => {
                edges.iter().map(|&(val, inw, l)| inw * (u - val) / l).fold(f64::INFINITY, f64::min)
            }
            CollarKind::Scaled => 2.0 * u.min(1.0 - u).min(v).min(1.0 - v),
        }
    }

    /// Tangential gradient of the collar parameter.
    pub fn level_gradient(&self, u: f64, v: f64) -> Vec3 {
        let p = self.patch();
        match &self.kind {
            CollarKind::Empty => Vec3::zeros(),
            CollarKind::Strip { edges } => {
                let (_, inw, l) = edges
                    .iter()
                    .copied()
                    .min_by(|a, b| {
                        let sa = a.1 * (u - a.0) / a.2;
                        let sb = b.1 * (u - b.0) / b.2;
                        sa.partial_cmp(&sb).unwrap()
                    })
                    .unwrap();
                p.tangential_gradient(u, v, inw / l, 0.0)
            }
            CollarKind::Scaled => {
                let cands = [(u, 2.0, 0.0), (1.0 - u, -2.0, 0.0), (v, 0.0, 2.0), (1.0 - v, 0.0, -2.0)];
                let (_, fu, fv) = cands.iter().copied().min_by(|a, b| a.0.partial_cmp(&b.0).unwrap()).unwrap();
                p.tangential_gradient(u, v, fu, fv)
            }
        }
    }

    /// `Γ^t = Ψ(t, Γ)` for `0 ≤ t < 1`.
    pub fn layer(&self, t: f64) -> Vec<Curve> {
        self.shrunk(t).boundary
    }

    /// `Ψ(t, γ(s))` for boundary component `k`.
    pub fn psi(&self, t: f64, k: usize, s: f64) -> Vec3 {
        match &self.kind {
            CollarKind::Empty => Vec3::from_element(f64::NAN),
            CollarKind::Strip { edges } => {
                let (val, inw, l) = edges[k];
                self.patch().point(val + inw * t * l, s)
            }
            CollarKind::Scaled => {
                let c = &self.manifold.boundary[k];
                let (u, v) = match c.edge.axis {
                    Axis::U => (c.edge.value, s),
                    Axis::V => (s, c.edge.value),
                };
                let sc = |q: f64| 0.5 + (1.0 - t) * (q - 0.5);
                self.patch().point(sc(u), sc(v))
            }
        }
    }

    fn shrunk(&self, t: f64) -> BoundaryManifold {
        match &self.kind {
            CollarKind::Empty => self.manifold.clone(),
            CollarKind::Strip { edges } => {
                let d = self.patch().domain();
                let (mut u0, mut u1) = d.u;
                for &(val, inw, l) in edges {
                    if inw > 0.0 {
                        u0 = val + t * l;
                    } else {
                        u1 = val - t * l;
                    }
                }
                BoundaryManifold::new(self.patch().with_u_range(u0, u1))
            }
            CollarKind::Scaled => {
                let mut p = self.patch().clone();
                if let Shape::Rect { origin, a, b } = &mut p.shape {
                    *origin += (*a + *b) * (0.5 * t);
                    *a *= 1.0 - t;
                    *b *= 1.0 - t;
                }
                BoundaryManifold::new(p)
            }
        }
    }

    /// Collar parameters at which a field with the given jumps is discontinuous.
    pub fn level_breaks(&self, breaks: &Breaks) -> Vec<f64> {
        match (breaks, &self.kind, &self.patch().shape) {
            (Breaks::Radii { center, radii }, CollarKind::Strip { edges }, Shape::Disk { center: c, .. })
                if (center - c).norm() < 1e-12 =>
            {
                radii
                    .iter()
                    .flat_map(|&r| edges.iter().map(move |&(val, inw, l)| inw * (r - val) / l))
                    .filter(|s| *s >= 0.0)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Nodes covering `Ψ((t0, t1) × Γ)` with `ns` Gauss points per unbroken piece in `s`.
    pub fn band_nodes(&self, t0: f64, t1: f64, breaks: &[f64], ns: usize, nv: usize) -> Vec<BandNode> {
        let t0 = t0.max(0.0);
        let t1 = t1.min(1.0);
        if t1 <= t0 {
            return Vec::new();
        }
        let gs = GaussLegendre::new(ns);
        let p = self.patch();
        let mut out = Vec::new();
        match &self.kind {
            CollarKind::Empty => {}
            CollarKind::Strip { edges } => {
                let d = p.domain();
                let tv = trapezoid_periodic(nv, d.v.0, d.v.1 - d.v.0);
                let pieces = split_points(t0, t1, breaks);
                for &(val, inw, l) in edges {
                    let grad_coef = inw / l;
                    for w in pieces.windows(2) {
                        for (s, ws) in gs.on(w[0], w[1]) {
                            let u = val + inw * s * l;
                            // Skip the part of the band owned by another edge.
                            if (self.level(u, 0.0) - s).abs() > 1e-12 {
                                continue;
                            }
                            let du = ws * l;
                            for &(v, wv) in &tv {
                                out.push(BandNode {
                                    u,
                                    v,
                                    s,
                                    x: p.point(u, v),
                                    w: du * wv * p.metric_jacobian(u, v),
                                    grad_s: p.tangential_gradient(u, v, grad_coef, 0.0),
                                    normal: p.normal(u, v),
                                });
                            }
                        }
                    }
                }
            }
            CollarKind::Scaled => {
                let gv = GaussLegendre::new(nv);
                let pieces = split_points(0.5 * t0, 0.5 * t1, &breaks.iter().map(|b| 0.5 * b).collect::<Vec<_>>());
                type Side = fn(f64, f64) -> (f64, f64);
                let sides: [(Side, f64, f64); 4] = [
                    (|q, r| (r, q), 0.0, 2.0),
                    (|q, r| (r, 1.0 - q), 0.0, -2.0),
                    (|q, r| (q, r), 2.0, 0.0),
                    (|q, r| (1.0 - q, r), -2.0, 0.0),
                ];
                for (map, fu, fv) in sides {
                    for w in pieces.windows(2) {
                        for (q, wq) in gs.on(w[0], w[1]) {
                            for (r, wr) in gv.on(q, 1.0 - q) {
                                let (u, v) = map(q, r);
                                out.push(BandNode {
                                    u,
                                    v,
                                    s: 2.0 * q,
                                    x: p.point(u, v),
                                    w: wq * wr * p.metric_jacobian(u, v),
                                    grad_s: p.tangential_gradient(u, v, fu, fv),
                                    normal: p.normal(u, v),
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn fit_theta(&self) -> f64 {
        let ts: Vec<f64> = (0..10).map(|i| 0.05 * i as f64).collect();
        let mut worst: f64 = 1.0;
        for (i, &s) in ts.iter().enumerate() {
            let inner: Vec<Vec3> = self.layer(s).iter().flat_map(|c| c.nodes(256).into_iter().map(|n| n.x)).collect();
            for &t in &ts[i + 1..] {
                for c in self.layer(t) {
                    for node in c.nodes(24) {
                        let d = inner.iter().map(|y| (y - node.x).norm()).fold(f64::INFINITY, f64::min);
                        let ratio = d / (t - s);
                        worst = worst.max(ratio).max(1.0 / ratio);
                    }
                }
            }
        }
        worst
    }

    fn fit_lipschitz(&self) -> f64 {
        self.band_nodes(0.0, 1.0, &[], 8, 16).iter().map(|n| n.grad_s.norm()).fold(0.0, f64::max)
    }
}

/// `Σ^{τ,t}`, the manifold with the collar layer `Ψ((0, t] × Γ)` removed.
pub fn shrink_tangential(
    manifold: &BoundaryManifold,
    collar: &TangentialCollar,
    t: f64,
) -> Result<BoundaryManifold, GeometryError> {
    if !(0.0..0.5).contains(&t) {
        return Err(GeometryError::OutOfRange { name: "t", value: t, range: "[0, 1/2)" });
    }
    if manifold != &collar.manifold {
        return Err(GeometryError::Mismatch("collar was built for a different manifold".into()));
    }
    Ok(collar.shrunk(t))
}

/// Localizer `ψ_{t,δ,Σ}`: zero off `Σ^{τ,t}`, one on `Σ^{τ,t+δ}`, linear ramp in between.
#[derive(Debug, Clone, Serialize)]
pub struct HeightFunction {
    pub collar: TangentialCollar,
    pub t: f64,
    pub delta: f64,
}

pub fn height_function(collar: &TangentialCollar, t: f64, delta: f64) -> Result<HeightFunction, GeometryError> {
    if !(0.0..0.5).contains(&t) {
        return Err(GeometryError::OutOfRange { name: "t", value: t, range: "[0, 1/2)" });
    }
    if !(delta > 0.0 && t + delta <= 1.0) {
        return Err(GeometryError::OutOfRange { name: "delta", value: delta, range: "(0, 1 - t]" });
    }
    Ok(HeightFunction { collar: collar.clone(), t, delta })
}

impl HeightFunction {
    pub fn value(&self, u: f64, v: f64) -> f64 {
        if self.collar.kind == CollarKind::Empty {
            return 1.0;
        }
        ((self.collar.level(u, v) - self.t) / self.delta).clamp(0.0, 1.0)
    }

    pub fn tangential_gradient(&self, u: f64, v: f64) -> Vec3 {
        let s = self.collar.level(u, v);
        if s > self.t && s < self.t + self.delta {
            self.collar.level_gradient(u, v) / self.delta
        } else {
            Vec3::zeros()
        }
    }

    /// Ramp nodes; each carries `∇_τψ = ∇_τ s / δ` in `grad_s`.
    pub fn ramp_nodes(&self, breaks: &[f64], ns: usize, nv: usize) -> Vec<BandNode> {
        let mut nodes = self.collar.band_nodes(self.t, self.t + self.delta, breaks, ns, nv);
        for n in &mut nodes {
            n.grad_s /= self.delta;
        }
        nodes
    }

    /// Per-manifold constant `c` with `‖∇_τψ‖_∞ ≤ c / δ`.
    pub fn lipschitz_constant(&self) -> f64 {
        self.collar.lipschitz
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn unit_disk() -> BoundaryManifold {
        BoundaryManifold::new(SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z()))
    }

    #[test]
    fn radial_collar_on_unit_disk() {
        let m = unit_disk();
        let c = build_tangential_collar(&m).unwrap();
        assert_abs_diff_eq!(c.theta, 2.0);
        for &t in &[0.0, 0.1, 0.3] {
            for &s in &[0.0, 1.0, 4.0] {
                let p = c.psi(t, 0, s);
                assert_abs_diff_eq!(p.norm(), 1.0 - t, epsilon = 1e-14);
            }
        }
        let shrunk = shrink_tangential(&m, &c, 0.25).unwrap();
        match shrunk.patch.shape {
            Shape::Disk { r1, .. } => assert_abs_diff_eq!(r1, 0.75, epsilon = 1e-15),
            _ => unreachable!(),
        }
        assert_eq!(shrink_tangential(&m, &c, 0.0).unwrap(), m);
        assert!(shrink_tangential(&m, &c, 0.5).is_err());
    }

    #[test]
    fn hemisphere_collar_follows_meridians() {
        let m = BoundaryManifold::new(SurfacePatch::cap(Vec3::zeros(), 1.0, Vec3::z(), PI / 2.0, true));
        let c = build_tangential_collar(&m).unwrap();
        // Great-circle chord between colatitudes π/2 and π/2 (1 − t) is 2 sin(πt/4).
        let t = 0.2;
        let p = c.psi(t, 0, 0.7);
        let q = c.psi(0.0, 0, 0.7);
        assert_abs_diff_eq!((p - q).norm(), 2.0 * (PI * t / 4.0).sin(), epsilon = 1e-14);
        assert!(c.theta_fit <= 2.0 && c.theta_fit >= PI / 2.0 - 1e-3);
    }

    #[test]
    fn closed_sphere_height_is_one() {
        let m = BoundaryManifold::new(SurfacePatch::sphere(Vec3::zeros(), 1.0, true));
        let c = build_tangential_collar(&m).unwrap();
        assert_eq!(c.kind, CollarKind::Empty);
        let h = height_function(&c, 0.1, 0.1).unwrap();
        assert_eq!(h.value(0.3, 0.2), 1.0);
        assert_eq!(h.tangential_gradient(0.3, 0.2), Vec3::zeros());
        assert!(h.ramp_nodes(&[], 4, 4).is_empty());
    }

    #[test]
    fn flat_ramp_gradient_is_one_over_delta() {
        let c = build_tangential_collar(&unit_disk()).unwrap();
        let h = height_function(&c, 0.0, 0.1).unwrap();
        for n in h.ramp_nodes(&[], 4, 8) {
            assert_abs_diff_eq!(n.grad_s.norm(), 10.0, epsilon = 1e-12);
        }
        assert_eq!(h.value(0.5, 0.0), 1.0);
        assert_abs_diff_eq!(h.value(0.95, 0.0), 0.5, epsilon = 1e-12);
        assert_eq!(h.value(1.0, 0.0), 0.0);
    }

    #[test]
    fn band_area_is_annulus_area() {
        let c = build_tangential_collar(&unit_disk()).unwrap();
        let a: f64 = c.band_nodes(0.1, 0.3, &[], 4, 16).iter().map(|n| n.w).sum();
        assert_abs_diff_eq!(a, PI * (0.81 - 0.49), epsilon = 1e-13);
    }

    #[test]
    fn rect_band_area_is_frame_area() {
        let m = BoundaryManifold::new(SurfacePatch::rect(
            Vec3::zeros(),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ));
        let c = build_tangential_collar(&m).unwrap();
        let a: f64 = c.band_nodes(0.0, 0.5, &[], 4, 8).iter().map(|n| n.w).sum();
        // Inner rectangle is scaled by one half.
        assert_abs_diff_eq!(a, 2.0 * (1.0 - 0.25), epsilon = 1e-13);
        assert!(c.theta <= 2.0 + 1e-12);
    }

    #[test]
    fn cap_area_decreases_when_shrunk() {
        let m = BoundaryManifold::new(SurfacePatch::cap(Vec3::zeros(), 1.0, Vec3::z(), 1.0, true));
        let c = build_tangential_collar(&m).unwrap();
        let a0 = m.patch.area(16);
        let a1 = shrink_tangential(&m, &c, 0.1).unwrap().patch.area(16);
        let a2 = shrink_tangential(&m, &c, 0.2).unwrap().patch.area(16);
        assert!(a0 > a1 && a1 > a2);
        // Exact cap area 2π(1 − cos α).
        assert_abs_diff_eq!(a1, 2.0 * PI * (1.0 - 0.9f64.cos()), epsilon = 1e-12);
    }

    #[test]
    fn annulus_breaks_map_to_levels() {
        let c = build_tangential_collar(&unit_disk()).unwrap();
        let b = c.level_breaks(&Breaks::Radii { center: Vec3::zeros(), radii: vec![0.5, 0.75] });
        assert_eq!(b, vec![0.5, 0.25]);
    }
}
