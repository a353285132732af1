use super::manifold::BoundaryManifold;
use super::patch::{Shape, SurfacePatch};
use super::quadrature::{trapezoid_periodic, GaussLegendre};
use super::{GeometryError, Vec3};
use nalgebra::Matrix3;
use serde::Serialize;
use std::f64::consts::PI;

/// Strictness margin for open-set membership.
const INSIDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RegionKind {
    Ball {
        center: Vec3,
        radius: f64,
    },
    /// `{|x − c| < R, (x − c)₃ > 0}`.
    HalfBall {
        center: Vec3,
        radius: f64,
    },
    /// `{|x′ − c′| < R, c₃ < x₃ < c₃ + H}`.
    Cylinder {
        base: Vec3,
        radius: f64,
        height: f64,
    },
    Box {
        lo: Vec3,
        hi: Vec3,
    },
    /// `Φ((0, ε) × ∂Ω′)` for the default transversal collar of `base`.
    CollarShell {
        base: Box<SolidRegion>,
        eps: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolidRegion {
    pub kind: RegionKind,
    /// Boundary patches with normals pointing into the region.
    pub boundary: Vec<SurfacePatch>,
}

#[derive(Debug, Clone, Copy)]
pub struct VolumeNode {
    pub x: Vec3,
    pub w: f64,
}

impl SolidRegion {
    pub fn ball(center: Vec3, radius: f64) -> Self {
        Self { kind: RegionKind::Ball { center, radius }, boundary: vec![SurfacePatch::sphere(center, radius, true)] }
    }

    pub fn half_ball(center: Vec3, radius: f64) -> Self {
        let mut flat = SurfacePatch::disk(center, radius, Vec3::z());
        flat.regularity = super::patch::Regularity::Lipschitz;
        Self {
            kind: RegionKind::HalfBall { center, radius },
            boundary: vec![flat, SurfacePatch::cap(center, radius, Vec3::z(), PI / 2.0, true)],
        }
    }

    pub fn cylinder(base: Vec3, radius: f64, height: f64) -> Self {
        Self {
            kind: RegionKind::Cylinder { base, radius, height },
            boundary: vec![
                SurfacePatch::disk(base, radius, Vec3::z()),
                SurfacePatch::disk(base + Vec3::z() * height, radius, -Vec3::z()),
                SurfacePatch::tube(base, radius, Vec3::z(), height, true),
            ],
        }
    }

    pub fn cuboid(lo: Vec3, hi: Vec3) -> Self {
        let d = hi - lo;
        let (ex, ey, ez) = (Vec3::x() * d.x, Vec3::y() * d.y, Vec3::z() * d.z);
        let boundary = vec![
            SurfacePatch::rect(lo, ey, ez),
            SurfacePatch::rect(lo + ex, ez, ey),
            SurfacePatch::rect(lo, ez, ex),
            SurfacePatch::rect(lo + ey, ex, ez),
            SurfacePatch::rect(lo, ex, ey),
            SurfacePatch::rect(lo + ez, ey, ex),
        ];
        Self { kind: RegionKind::Box { lo, hi }, boundary }
    }

    pub fn collar_shell(base: SolidRegion, eps: f64) -> Result<Self, GeometryError> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(GeometryError::OutOfRange { name: "eps", value: eps, range: "(0, 1/2)" });
        }
        let boundary = base.boundary.clone();
        Ok(Self { kind: RegionKind::CollarShell { base: Box::new(base), eps }, boundary })
    }

    /// Lower and upper parts cut by the plane `{x₃ = z}`, for cylinders and boxes.
    pub fn split_at_height(&self, z: f64) -> Option<(SolidRegion, SolidRegion)> {
        match &self.kind {
            RegionKind::Cylinder { base, radius, height } if z > base.z && z < base.z + height => Some((
                SolidRegion::cylinder(*base, *radius, z - base.z),
                SolidRegion::cylinder(Vec3::new(base.x, base.y, z), *radius, base.z + height - z),
            )),
            RegionKind::Box { lo, hi } if z > lo.z && z < hi.z => Some((
                SolidRegion::cuboid(*lo, Vec3::new(hi.x, hi.y, z)),
                SolidRegion::cuboid(Vec3::new(lo.x, lo.y, z), *hi),
            )),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            RegionKind::Ball { .. } => "ball",
            RegionKind::HalfBall { .. } => "half-ball",
            RegionKind::Cylinder { .. } => "cylinder",
            RegionKind::Box { .. } => "box",
            RegionKind::CollarShell { .. } => "collar-shell",
        }
    }

    /// Open-set membership with a small inward margin.
    pub fn contains(&self, x: &Vec3) -> bool {
        let t = INSIDE_TOL;
        match &self.kind {
            RegionKind::Ball { center, radius } => (x - center).norm() < radius - t,
            RegionKind::HalfBall { center, radius } => {
                let d = x - center;
                d.z > t && d.norm() < radius - t
            }
            RegionKind::Cylinder { base, radius, height } => {
                let d = x - base;
                d.xy().norm() < radius - t && d.z > t && d.z < height - t
            }
            RegionKind::Box { lo, hi } => (0..3).all(|i| x[i] > lo[i] + t && x[i] < hi[i] - t),
            RegionKind::CollarShell { base, eps } => {
                if !base.contains(x) {
                    return false;
                }
                let collar = match build_transversal_collar(base) {
                    Ok(c) => c,
                    Err(_) => return false,
                };
                collar.fields.iter().zip(&base.boundary).any(|(h, p)| {
                    h.invert(x, p).is_some_and(|(s, foot)| {
                        let (u, v) = p.param_of(&foot);
                        s > 0.0 && s < *eps && p.contains_param(u, v, 0.0)
                    })
                })
            }
        }
    }

    pub fn on_boundary(&self, x: &Vec3, tol: f64) -> bool {
        self.boundary.iter().any(|p| p.contains_point(x, tol))
    }

    /// Continuous level functions; the region is where all of them are positive
    /// (for a collar shell, where all levels of some boundary patch are).
    pub fn levels(&self, x: &Vec3) -> Vec<f64> {
        match &self.kind {
            RegionKind::Ball { center, radius } => vec![radius - (x - center).norm()],
            RegionKind::HalfBall { center, radius } => {
                let d = x - center;
                vec![radius - d.norm(), d.z]
            }
            RegionKind::Cylinder { base, radius, height } => {
                let d = x - base;
                vec![radius - d.xy().norm(), d.z, height - d.z]
            }
            RegionKind::Box { lo, hi } => (0..3).flat_map(|i| [x[i] - lo[i], hi[i] - x[i]]).collect(),
            RegionKind::CollarShell { base, eps } => {
                let mut out = base.levels(x);
                if let Ok(c) = build_transversal_collar(base) {
                    for (h, p) in c.fields.iter().zip(&base.boundary) {
                        if let Some((s, foot)) = h.invert(x, p) {
                            let (u, v) = p.param_of(&foot);
                            out.extend([s, eps - s, p.param_margin(u, v)]);
                        }
                    }
                }
                out
            }
        }
    }

    /// `{λ ∈ [lo, hi] : p + λ d ∈ region}` as a union of intervals.
    pub fn clip_segment(&self, p: &Vec3, d: &Vec3, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        if let RegionKind::CollarShell { .. } = self.kind {
            return super::clip::clip_intervals(lo, hi, 256, &|l| self.levels(&(p + d * l)), &|l| {
                self.contains(&(p + d * l))
            });
        }
        self.clip_line(p, d, lo, hi).into_iter().collect()
    }

    /// Parameter interval `{λ ∈ [lo, hi] : p + λ d ∈ region}` for convex regions.
    pub fn clip_line(&self, p: &Vec3, d: &Vec3, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let mut a = lo;
        let mut b = hi;
        let ball = |c: &Vec3, r: f64, a: &mut f64, b: &mut f64| -> bool {
            let q = p - c;
            let (qa, qb, qc) = (d.dot(d), 2.0 * q.dot(d), q.dot(&q) - r * r);
            match quadratic_interval(qa, qb, qc) {
                Some((l0, l1)) => {
                    *a = a.max(l0);
                    *b = b.min(l1);
                    true
                }
                None => false,
            }
        };
        let slab = |p0: f64, d0: f64, s0: f64, s1: f64, a: &mut f64, b: &mut f64| -> bool {
            if d0.abs() < 1e-300 {
                return p0 > s0 && p0 < s1;
            }
            let (mut l0, mut l1) = ((s0 - p0) / d0, (s1 - p0) / d0);
            if l0 > l1 {
                std::mem::swap(&mut l0, &mut l1);
            }
            *a = a.max(l0);
            *b = b.min(l1);
            true
        };
        let ok = match &self.kind {
            RegionKind::Ball { center, radius } => ball(center, *radius, &mut a, &mut b),
            RegionKind::HalfBall { center, radius } => {
                ball(center, *radius, &mut a, &mut b) && slab(p.z - center.z, d.z, 0.0, f64::INFINITY, &mut a, &mut b)
            }
            RegionKind::Cylinder { base, radius, height } => {
                let q = p - base;
                let (qa, qb, qc) =
                    (d.xy().norm_squared(), 2.0 * q.xy().dot(&d.xy()), q.xy().norm_squared() - radius * radius);
                let radial = if qa < 1e-300 {
                    qc < 0.0
                } else {
                    match quadratic_interval(qa, qb, qc) {
                        Some((l0, l1)) => {
                            a = a.max(l0);
                            b = b.min(l1);
                            true
                        }
                        None => false,
                    }
                };
                radial && slab(q.z, d.z, 0.0, *height, &mut a, &mut b)
            }
            RegionKind::Box { lo: l, hi: h } => (0..3).all(|i| slab(p[i], d[i], l[i], h[i], &mut a, &mut b)),
            RegionKind::CollarShell { .. } => return None,
        };
        (ok && b > a).then_some((a, b))
    }

    /// Product rule over the reference parametrization.
    pub fn volume_nodes(&self, n: usize) -> Vec<VolumeNode> {
        let g = GaussLegendre::new(n);
        let mut out = Vec::new();
        let spherical = |center: &Vec3, radius: f64, beta_max: f64, out: &mut Vec<VolumeNode>| {
            let tp = trapezoid_periodic(2 * n, 0.0, 2.0 * PI);
            for (r, wr) in g.on(0.0, radius) {
                for (c, wc) in g.on(beta_max.cos(), 1.0) {
                    let sb = (1.0 - c * c).sqrt();
                    for &(p, wp) in &tp {
                        let dir = Vec3::new(sb * p.cos(), sb * p.sin(), c);
                        out.push(VolumeNode { x: center + dir * r, w: wr * wc * wp * r * r });
                    }
                }
            }
        };
        match &self.kind {
            RegionKind::Ball { center, radius } => spherical(center, *radius, PI, &mut out),
            RegionKind::HalfBall { center, radius } => spherical(center, *radius, PI / 2.0, &mut out),
            RegionKind::Cylinder { base, radius, height } => {
                let tp = trapezoid_periodic(2 * n, 0.0, 2.0 * PI);
                for (r, wr) in g.on(0.0, *radius) {
                    for &(p, wp) in &tp {
                        for (z, wz) in g.on(0.0, *height) {
                            out.push(VolumeNode {
                                x: base + Vec3::new(r * p.cos(), r * p.sin(), z),
                                w: wr * wp * wz * r,
                            });
                        }
                    }
                }
            }
            RegionKind::Box { lo, hi } => {
                for (x, wx) in g.on(lo.x, hi.x) {
                    for (y, wy) in g.on(lo.y, hi.y) {
                        for (z, wz) in g.on(lo.z, hi.z) {
                            out.push(VolumeNode { x: Vec3::new(x, y, z), w: wx * wy * wz });
                        }
                    }
                }
            }
            RegionKind::CollarShell { base, eps } => {
                if let Ok(c) = build_transversal_collar(base) {
                    out.extend(c.shell_nodes(0.0, *eps, n, n).into_iter().map(|s| VolumeNode { x: s.x, w: s.w }));
                }
            }
        }
        out
    }

    pub fn volume(&self, n: usize) -> f64 {
        self.volume_nodes(n).iter().map(|v| v.w).sum()
    }
}

fn quadratic_interval(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r0, r1) = if q == 0.0 { (-sq / (2.0 * a), sq / (2.0 * a)) } else { (q / a, c / q) };
    Some((r0.min(r1), r0.max(r1)))
}

/// Transversal field `h` of a collar `Φ(t, x) = x − t h(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TransversalField {
    /// `h = (x − c)/|x − c|`.
    Radial {
        center: Vec3,
    },
    /// Radial from the vertical line through `base`.
    Axial {
        base: Vec3,
    },
    Constant {
        dir: Vec3,
    },
    /// Normalized gradient of the ellipsoidal gauge `Σ (x_i − c_i)² / a_i²`.
    Ellipsoidal {
        center: Vec3,
        half: Vec3,
    },
}

impl TransversalField {
    pub fn eval(&self, x: &Vec3) -> Vec3 {
        match self {
            TransversalField::Radial { center } => (x - center).normalize(),
            TransversalField::Axial { base } => {
                let d = x - base;
                Vec3::new(d.x, d.y, 0.0).normalize()
            }
            TransversalField::Constant { dir } => dir.normalize(),
            TransversalField::Ellipsoidal { center, half } => {
                let d = x - center;
                Vec3::new(d.x / (half.x * half.x), d.y / (half.y * half.y), d.z / (half.z * half.z)).normalize()
            }
        }
    }

    pub fn jacobian(&self, x: &Vec3) -> Matrix3<f64> {
        match self {
            TransversalField::Radial { center } => {
                let d = x - center;
                let r = d.norm();
                let h = d / r;
                (Matrix3::identity() - h * h.transpose()) / r
            }
            TransversalField::Axial { base } => {
                let d = x - base;
                let w = Vec3::new(d.x, d.y, 0.0);
                let r = w.norm();
                let h = w / r;
                let p = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, 0.0));
                (p - h * h.transpose()) / r
            }
            TransversalField::Constant { .. } => Matrix3::zeros(),
            TransversalField::Ellipsoidal { center, half } => {
                let d = x - center;
                let dinv = Vec3::new(1.0 / (half.x * half.x), 1.0 / (half.y * half.y), 1.0 / (half.z * half.z));
                let w = d.component_mul(&dinv);
                let r = w.norm();
                let h = w / r;
                (Matrix3::identity() - h * h.transpose()) * Matrix3::from_diagonal(&dinv) / r
            }
        }
    }

    /// Solve `X − s h(X) = x` with `X` on the full surface underlying `patch`.
    pub fn invert(&self, x: &Vec3, patch: &SurfacePatch) -> Option<(f64, Vec3)> {
        match (self, &patch.shape) {
            (TransversalField::Radial { center }, Shape::Zone { center: c, radius, .. })
                if (center - c).norm() < 1e-12 =>
            {
                let d = x - center;
                let r = d.norm();
                (r > 0.0).then(|| (radius - r, center + d * (radius / r)))
            }
            (TransversalField::Constant { dir }, Shape::Disk { .. } | Shape::Rect { .. }) => {
                let n = patch.normal(0.5, 0.0);
                let foot = patch.project(x);
                let h = dir.normalize();
                let hn = h.dot(&n);
                if hn.abs() < 1e-14 {
                    return None;
                }
                let s = -(x - foot).dot(&n) / hn;
                Some((s, x + h * s))
            }
            (TransversalField::Axial { base }, Shape::Tube { base: b, radius, .. })
                if (base.xy() - b.xy()).norm() < 1e-12 =>
            {
                let d = x - base;
                let w = Vec3::new(d.x, d.y, 0.0);
                let r = w.norm();
                (r > 0.0).then(|| (radius - r, x + w * ((radius - r) / r)))
            }
            _ => None,
        }
    }
}

/// `Φ(t, x) = x − t h(x)` on the boundary of a region, one field per boundary patch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransversalCollar {
    pub region: SolidRegion,
    pub fields: Vec<TransversalField>,
    /// `min (−ν · h)` over boundary nodes.
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ShellNode {
    pub x: Vec3,
    pub w: f64,
    /// Collar parameter and its ambient gradient.
    pub s: f64,
    pub grad_s: Vec3,
    pub patch: usize,
}

pub fn build_transversal_collar(region: &SolidRegion) -> Result<TransversalCollar, GeometryError> {
    let fields: Vec<TransversalField> = match &region.kind {
        RegionKind::Ball { center, .. } => vec![TransversalField::Radial { center: *center }],
        RegionKind::HalfBall { center, .. } => {
            vec![TransversalField::Constant { dir: -Vec3::z() }, TransversalField::Radial { center: *center }]
        }
        RegionKind::Cylinder { base, .. } => vec![
            TransversalField::Constant { dir: -Vec3::z() },
            TransversalField::Constant { dir: Vec3::z() },
            TransversalField::Axial { base: *base },
        ],
        RegionKind::Box { lo, hi } => {
            let f = TransversalField::Ellipsoidal { center: (lo + hi) * 0.5, half: (hi - lo) * 0.5 };
            vec![f; 6]
        }
        RegionKind::CollarShell { base, .. } => return build_transversal_collar(base),
    };
    with_fields(region, fields)
}

/// Collar with user-chosen fields; rejects fields that are not transversal.
pub fn with_fields(region: &SolidRegion, fields: Vec<TransversalField>) -> Result<TransversalCollar, GeometryError> {
    if fields.len() != region.boundary.len() {
        return Err(GeometryError::Mismatch("one transversal field per boundary patch".into()));
    }
    let mut kappa = f64::INFINITY;
    for (p, h) in region.boundary.iter().zip(&fields) {
        let rule = p.rule(8);
        for node in &rule.nodes {
            let x = p.point(node[0], node[1]);
            let hv = h.eval(&x);
            if (hv.norm() - 1.0).abs() > 1e-12 {
                return Err(GeometryError::NotTransversal { kappa: f64::NAN });
            }
            kappa = kappa.min(-p.normal(node[0], node[1]).dot(&hv));
        }
    }
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(GeometryError::NotTransversal { kappa });
    }
    Ok(TransversalCollar { region: region.clone(), fields, kappa })
}

impl TransversalCollar {
    /// `Φ(t, x)` using the field of patch `k`.
    pub fn phi(&self, k: usize, t: f64, x: &Vec3) -> Vec3 {
        x - self.fields[k].eval(x) * t
    }

    /// Index of the boundary patch carrying `patch`.
    pub fn patch_index(&self, patch: &SurfacePatch) -> Option<usize> {
        let d = patch.domain();
        let (u, v) = (0.5 * (d.u.0 + d.u.1), 0.5 * (d.v.0 + d.v.1));
        let probe = patch.point(u, v);
        let n = patch.normal(u, v);
        self.region.boundary.iter().position(|b| {
            let (bu, bv) = b.param_of(&probe);
            b.contains_point(&probe, 1e-9) && b.normal(bu, bv).dot(&n) > 0.0
        })
    }

    /// Normal of `Φ(t, Σ)` at `Φ(t, X(u, v))`, oriented like `ν`.
    pub fn shifted_normal(&self, k: usize, patch: &SurfacePatch, t: f64, u: f64, v: f64) -> Vec3 {
        let x = patch.point(u, v);
        let (xu, xv) = patch.tangents(u, v);
        let dh = self.fields[k].jacobian(&x);
        let a = xu - dh * xu * t;
        let b = xv - dh * xv * t;
        let n = a.cross(&b);
        let nn = n.norm();
        let base = patch.normal(u, v);
        if nn == 0.0 {
            return base;
        }
        let n = n / nn;
        if n.dot(&base) < 0.0 {
            -n
        } else {
            n
        }
    }

    /// Nodes of `Φ((s0, s1) × Σ_k)` for the given patch (or all boundary patches).
    pub fn shell_nodes_on(
        &self,
        k: usize,
        patch: &SurfacePatch,
        s0: f64,
        s1: f64,
        ns: usize,
        np: usize,
    ) -> Vec<ShellNode> {
        let gs = GaussLegendre::new(ns);
        let rule = patch.rule(np);
        let h = &self.fields[k];
        let mut out = Vec::with_capacity(ns * rule.len());
        for (node, wuv) in rule.nodes.iter().zip(&rule.weights) {
            let (u, v) = (node[0], node[1]);
            let x0 = patch.point(u, v);
            let (xu, xv) = patch.tangents(u, v);
            let hv = h.eval(&x0);
            let dh = h.jacobian(&x0);
            for (s, ws) in gs.on(s0, s1) {
                let m = Matrix3::from_columns(&[-hv, xu - dh * xu * s, xv - dh * xv * s]);
                let det = m.determinant();
                let grad_s = match m.try_inverse() {
                    Some(inv) => inv.row(0).transpose(),
                    None => Vec3::zeros(),
                };
                out.push(ShellNode { x: x0 - hv * s, w: ws * wuv * det.abs(), s, grad_s, patch: k });
            }
        }
        out
    }

    pub fn shell_nodes(&self, s0: f64, s1: f64, ns: usize, np: usize) -> Vec<ShellNode> {
        (0..self.fields.len()).flat_map(|k| self.shell_nodes_on(k, &self.region.boundary[k], s0, s1, ns, np)).collect()
    }
}

/// `Σ^{Φ,t} = Φ(t, Σ)` for the canonical shape/field pairs.
pub fn shift_transversal(
    manifold: &BoundaryManifold,
    collar: &TransversalCollar,
    t: f64,
) -> Result<BoundaryManifold, GeometryError> {
    if t.abs() >= 0.5 {
        return Err(GeometryError::OutOfRange { name: "t", value: t, range: "(-1/2, 1/2)" });
    }
    let k = collar
        .patch_index(&manifold.patch)
        .ok_or_else(|| GeometryError::Mismatch("manifold is not part of the collar boundary".into()))?;
    let mut p = manifold.patch.clone();
    let field = &collar.fields[k];
    match (field, &mut p.shape) {
        (TransversalField::Radial { center }, Shape::Zone { center: c, radius, .. })
            if (*center - *c).norm() < 1e-12 =>
        {
            *radius -= t;
            if *radius <= 0.0 {
                return Err(GeometryError::LeftCollar { t });
            }
        }
        (TransversalField::Constant { dir }, Shape::Disk { center, .. }) => *center -= dir.normalize() * t,
        (TransversalField::Constant { dir }, Shape::Rect { origin, .. }) => *origin -= dir.normalize() * t,
        (TransversalField::Constant { dir }, Shape::Tube { base, .. }) => *base -= dir.normalize() * t,
        (TransversalField::Axial { base }, Shape::Tube { base: b, radius, .. })
            if (base.xy() - b.xy()).norm() < 1e-12 =>
        {
            *radius -= t;
            if *radius <= 0.0 {
                return Err(GeometryError::LeftCollar { t });
            }
        }
        _ => {
            return Err(GeometryError::Unsupported("no closed-form shift for this shape and transversal field".into()))
        }
    }
    Ok(BoundaryManifold::new(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ball_collar_moves_inward() {
        let r = SolidRegion::ball(Vec3::zeros(), 1.0);
        let c = build_transversal_collar(&r).unwrap();
        assert_abs_diff_eq!(c.kappa, 1.0, epsilon = 1e-12);
        let x = Vec3::new(0.0, 0.6, 0.8);
        assert_abs_diff_eq!((c.phi(0, 0.25, &x) - x * 0.75).norm(), 0.0, epsilon = 1e-15);
        let m = BoundaryManifold::new(r.boundary[0].clone());
        let s = shift_transversal(&m, &c, 0.1).unwrap();
        match s.patch.shape {
            Shape::Zone { radius, .. } => assert_abs_diff_eq!(radius, 0.9, epsilon = 1e-15),
            _ => unreachable!(),
        }
        assert_eq!(shift_transversal(&m, &c, 0.0).unwrap(), m);
    }

    #[test]
    fn half_ball_flat_face_shifts_up() {
        let r = SolidRegion::half_ball(Vec3::zeros(), 1.0);
        let c = build_transversal_collar(&r).unwrap();
        let m = BoundaryManifold::new(r.boundary[0].clone());
        let s = shift_transversal(&m, &c, 0.1).unwrap();
        assert_abs_diff_eq!(s.patch.point(0.3, 1.0).z, 0.1, epsilon = 1e-15);
        assert!(shift_transversal(&m, &c, 0.6).is_err());
    }

    #[test]
    fn box_smoothed_field_is_transversal() {
        let r = SolidRegion::cuboid(Vec3::from_element(-1.0), Vec3::from_element(1.0));
        let c = build_transversal_collar(&r).unwrap();
        assert!(c.kappa >= 0.5, "kappa = {}", c.kappa);
    }

    #[test]
    fn inward_field_is_rejected() {
        let r = SolidRegion::ball(Vec3::zeros(), 1.0);
        let err = with_fields(&r, vec![TransversalField::Constant { dir: Vec3::z() }]).unwrap_err();
        assert!(matches!(err, GeometryError::NotTransversal { .. }));
    }

    #[test]
    fn volumes() {
        let pi = std::f64::consts::PI;
        assert_abs_diff_eq!(SolidRegion::ball(Vec3::zeros(), 1.0).volume(8), 4.0 * pi / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(SolidRegion::half_ball(Vec3::zeros(), 1.0).volume(8), 2.0 * pi / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(SolidRegion::cylinder(Vec3::zeros(), 1.0, 2.0).volume(8), 2.0 * pi, epsilon = 1e-12);
        assert_abs_diff_eq!(
            SolidRegion::cuboid(Vec3::zeros(), Vec3::new(1.0, 2.0, 3.0)).volume(3),
            6.0,
            epsilon = 1e-12
        );
        let shell = SolidRegion::collar_shell(SolidRegion::ball(Vec3::zeros(), 1.0), 0.1).unwrap();
        assert_abs_diff_eq!(shell.volume(8), 4.0 * pi / 3.0 * (1.0 - 0.729), epsilon = 1e-12);
        assert!(shell.contains(&Vec3::new(0.0, 0.0, 0.95)));
        assert!(!shell.contains(&Vec3::new(0.0, 0.0, 0.5)));
    }

    #[test]
    fn cylinder_shell_volume_matches_difference() {
        let base = SolidRegion::cylinder(Vec3::zeros(), 1.0, 1.0);
        let c = build_transversal_collar(&base).unwrap();
        // Faces overlap at the rims; the total is still a polynomial in ε.
        let eps = 0.1;
        let v: f64 = c.shell_nodes(0.0, eps, 4, 8).iter().map(|n| n.w).sum();
        let pi = std::f64::consts::PI;
        let exact = 2.0 * pi * eps + 2.0 * pi * (eps - eps * eps / 2.0);
        assert_abs_diff_eq!(v, exact, epsilon = 1e-12);
    }

    #[test]
    fn boundaries_have_inward_normals() {
        for r in [
            SolidRegion::ball(Vec3::zeros(), 1.0),
            SolidRegion::half_ball(Vec3::zeros(), 1.0),
            SolidRegion::cylinder(Vec3::zeros(), 1.0, 1.0),
            SolidRegion::cuboid(Vec3::zeros(), Vec3::from_element(1.0)),
        ] {
            for p in &r.boundary {
                for node in p.rule(4).nodes {
                    let x = p.point(node[0], node[1]);
                    let y = x + p.normal(node[0], node[1]) * 1e-6;
                    assert!(r.contains(&y), "{} {:?}", r.name(), x);
                    assert!(r.on_boundary(&x, 1e-9));
                }
            }
        }
    }

    #[test]
    fn line_clipping() {
        let cyl = SolidRegion::cylinder(Vec3::zeros(), 1.0, 1.0);
        let (a, b) = cyl.clip_line(&Vec3::new(0.0, 0.0, -5.0), &Vec3::z(), -10.0, 10.0).unwrap();
        assert_abs_diff_eq!(a, 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b, 6.0, epsilon = 1e-14);
        let hb = SolidRegion::half_ball(Vec3::zeros(), 1.0);
        let (a, b) = hb.clip_line(&Vec3::zeros(), &Vec3::z(), -10.0, 10.0).unwrap();
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-14);
        assert!(hb.clip_line(&Vec3::new(2.0, 0.0, 0.0), &Vec3::z(), -10.0, 10.0).is_none());
    }
}
