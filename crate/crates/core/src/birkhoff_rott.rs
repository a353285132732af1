//! Desingularized Birkhoff–Rott evolution of a parametrized vortex sheet.

use crate::geometry::Vec3;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BrError {
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("desingularization must be positive, got {0}")]
    InvalidDesing(f64),
    #[error("grid mismatch: {0}")]
    Grid(String),
}

/// Markers `X(ξ₁, ξ₂)` on an `nx × ny` grid (row-major in `ξ₁`) with the jump `γ = u_τ⁺ − u_τ⁻`.
#[derive(Debug, Clone, Serialize)]
pub struct SheetState {
    pub nx: usize,
    pub ny: usize,
    pub markers: Vec<Vec3>,
    pub strength: Vec<Vec3>,
    pub area_weights: Vec<f64>,
    /// Parameter spacings `(Δξ₁, Δξ₂)`.
    pub spacing: (f64, f64),
    pub desing: f64,
    pub time: f64,
    /// Periods along `e₁` and `e₂` for doubly periodic sheets.
    pub period: Option<(f64, f64)>,
    /// Uniform velocity added to the induced one.
    pub background: Vec3,
    /// Image copies summed in each periodic direction on either side of the minimum image.
    pub images: usize,
}

impl SheetState {
    /// Doubly periodic graph `x₃ = h(x₁, x₂)` over `[0, lx) × [0, ly)` sampled at cell centers.
    pub fn periodic_graph(
        nx: usize,
        ny: usize,
        lx: f64,
        ly: f64,
        height: impl Fn(f64, f64) -> f64,
        strength: impl Fn(&Vec3) -> Vec3,
        desing: f64,
    ) -> Result<Self, BrError> {
        if nx < 3 || ny < 3 {
            return Err(BrError::Grid("periodic sheets need at least 3 × 3 markers".into()));
        }
        let (hx, hy) = (lx / nx as f64, ly / ny as f64);
        let markers: Vec<Vec3> = (0..nx * ny)
            .map(|k| {
                let (x, y) = ((k % nx) as f64 * hx + 0.5 * hx, (k / nx) as f64 * hy + 0.5 * hy);
                Vec3::new(x, y, height(x, y))
            })
            .collect();
        let strength = markers.iter().map(&strength).collect();
        Self::from_parts(nx, ny, markers, strength, (hx, hy), desing, Some((lx, ly)))
    }

    /// Flat periodic sheet on the unit square with constant strength.
    pub fn flat(n: usize, gamma: Vec3, desing: f64) -> Result<Self, BrError> {
        Self::periodic_graph(n, n, 1.0, 1.0, |_, _| 0.0, |_| gamma, desing)
    }

    /// Builds a state from raw grids; strengths are projected onto the discrete tangent planes.
    pub fn from_parts(
        nx: usize,
        ny: usize,
        markers: Vec<Vec3>,
        strength: Vec<Vec3>,
        spacing: (f64, f64),
        desing: f64,
        period: Option<(f64, f64)>,
    ) -> Result<Self, BrError> {
        if markers.len() != nx * ny || strength.len() != nx * ny {
            return Err(BrError::Grid(format!(
                "expected {} markers and strengths, got {} and {}",
                nx * ny,
                markers.len(),
                strength.len()
            )));
        }
        if !(desing > 0.0) {
            return Err(BrError::InvalidDesing(desing));
        }
        let mut s = Self {
            nx,
            ny,
            markers,
            strength,
            area_weights: Vec::new(),
            spacing,
            desing,
            time: 0.0,
            period,
            background: Vec3::zeros(),
            images: 1,
        };
        let (normals, weights) = s.geometry();
        for (g, n) in s.strength.iter_mut().zip(&normals) {
            *g -= n * g.dot(n);
        }
        s.area_weights = weights;
        Ok(s)
    }

    pub fn with_background(mut self, u: Vec3) -> Self {
        self.background = u;
        self
    }

    /// `2 max(Δξ₁, Δξ₂)`.
    pub fn default_desing(spacing: (f64, f64)) -> f64 {
        2.0 * spacing.0.max(spacing.1)
    }

    /// Same sheet with `γ` and the background flow reversed, so a forward step runs time backwards.
    pub fn reversed(&self) -> Self {
        let mut s = self.clone();
        s.strength.iter_mut().for_each(|g| *g = -*g);
        s.background = -s.background;
        s
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    /// Circulation elements `γ dH²` carried by the markers.
    pub fn circulation_elements(&self) -> Vec<Vec3> {
        self.strength.iter().zip(&self.area_weights).map(|(g, w)| g * *w).collect()
    }

    /// Difference `X_a − X_b` of grid neighbors, unwrapped across periods.
    fn neighbor(&self, pos: &[Vec3], i: isize, j: isize) -> Vec3 {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let (wi, wj) = (i.rem_euclid(nx), j.rem_euclid(ny));
        let mut x = pos[(wj * nx + wi) as usize];
        if let Some((lx, ly)) = self.period {
            x.x += lx * i.div_euclid(nx) as f64;
            x.y += ly * j.div_euclid(ny) as f64;
        }
        x
    }

    /// Discrete tangents `(X_{ξ₁}, X_{ξ₂})` by central differences, one-sided at open edges.
    fn tangents_at(&self, pos: &[Vec3], i: usize, j: usize) -> (Vec3, Vec3) {
        let (hx, hy) = self.spacing;
        let (i, j) = (i as isize, j as isize);
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        let diff = |a: (isize, isize), b: (isize, isize), h: f64| {
            (self.neighbor(pos, a.0, a.1) - self.neighbor(pos, b.0, b.1)) / h
        };
        let periodic = self.period.is_some();
        let tu = if periodic || (i > 0 && i < nx - 1) {
            diff((i + 1, j), (i - 1, j), 2.0 * hx)
        } else if i == 0 {
            diff((1, j), (0, j), hx)
        } else {
            diff((i, j), (i - 1, j), hx)
        };
        let tv = if periodic || (j > 0 && j < ny - 1) {
            diff((i, j + 1), (i, j - 1), 2.0 * hy)
        } else if j == 0 {
            diff((i, 1), (i, 0), hy)
        } else {
            diff((i, j), (i, j - 1), hy)
        };
        (tu, tv)
    }

    /// Unit normals and area weights of the current marker grid.
    fn geometry(&self) -> (Vec<Vec3>, Vec<f64>) {
        let (hx, hy) = self.spacing;
        (0..self.len())
            .map(|k| {
                let (tu, tv) = self.tangents_at(&self.markers, k % self.nx, k / self.nx);
                let n = tu.cross(&tv);
                let a = n.norm();
                (if a > 0.0 { n / a } else { Vec3::z() }, a * hx * hy)
            })
            .unzip()
    }

    pub fn normals(&self) -> Vec<Vec3> {
        self.geometry().0
    }

    /// Largest `|γ · n| / |γ|` over markers.
    pub fn tangential_residual(&self) -> f64 {
        self.strength
            .iter()
            .zip(self.normals())
            .filter(|(g, _)| g.norm() > 0.0)
            .map(|(g, n)| g.dot(&n).abs() / g.norm())
            .fold(0.0, f64::max)
    }
}

/// Largest supported number of image rings.
pub const MAX_IMAGES: usize = 3;

/// `1 − S(u)` for the degree-9 smoothstep `S`, which is C⁴ and satisfies `S(u) + S(1 − u) = 1`.
fn taper(u: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    let u2 = u * u;
    1.0 - u2 * u2 * u * (126.0 + u * (-420.0 + u * (540.0 + u * (-315.0 + u * 70.0))))
}

/// Image offsets `s` of a separation along one periodic axis with weights equal to one for
/// `|s| ≤ mL` and tapering to zero at `(m + 1)L`; the weights of all copies sum to `2m + 1`.
/// The third entry is the offset index, zero for the copy of `v` reduced to `[0, L)`.
fn lattice_window(v: f64, l: f64, m: usize, out: &mut [(f64, f64, i64); 2 * MAX_IMAGES + 2]) -> usize {
    let base = v - l * (v / l).floor();
    let m = m as i64;
    let mut n = 0;
    for k in -(m + 1)..=m {
        let s = base + k as f64 * l;
        let u = s.abs() / l - m as f64;
        let w = if u <= 0.0 { 1.0 } else { taper(u) };
        if w > 0.0 {
            out[n] = (s, w, k);
            n += 1;
        }
    }
    n
}

/// `−(1/4π) Σ_j c_j × r / (|r|² + δ²)^{3/2}`, with `r = x − X_j`. Periodic sheets sum a smooth
/// window of `(2m + 1)²` image tiles so the velocity is smooth in the marker positions.
#[allow(clippy::too_many_arguments)]
fn induced(
    positions: &[Vec3],
    circ: &[Vec3],
    period: Option<(f64, f64)>,
    images: usize,
    desing: f64,
    x: &Vec3,
    skip: Option<usize>,
) -> Vec3 {
    let images = images.min(MAX_IMAGES);
    let d2 = desing * desing;
    let mut acc = Vec3::zeros();
    let kernel = |r: Vec3| {
        let q = r.norm_squared() + d2;
        r / (q * q.sqrt())
    };
    for (j, (xj, cj)) in positions.iter().zip(circ).enumerate() {
        let r0 = x - xj;
        match period {
            None => {
                if skip != Some(j) {
                    acc += cj.cross(&kernel(r0));
                }
            }
            Some((lx, ly)) => {
                let (mut xs, mut ys) = ([(0.0, 0.0, 0); 2 * MAX_IMAGES + 2], [(0.0, 0.0, 0); 2 * MAX_IMAGES + 2]);
                let nx = lattice_window(r0.x, lx, images, &mut xs);
                let ny = lattice_window(r0.y, ly, images, &mut ys);
                let mut sum = Vec3::zeros();
                for &(bx, wx, kx) in &xs[..nx] {
                    for &(by, wy, ky) in &ys[..ny] {
                        if skip == Some(j) && kx == 0 && ky == 0 {
                            continue;
                        }
                        sum += kernel(Vec3::new(bx, by, r0.z)) * (wx * wy);
                    }
                }
                acc += cj.cross(&sum);
            }
        }
    }
    acc * (-1.0 / (4.0 * PI))
}

/// Desingularized Birkhoff–Rott velocity at `x`; the self-term is dropped when `x` is marker `skip`.
pub fn br_velocity(sheet: &SheetState, x: &Vec3, skip: Option<usize>) -> Vec3 {
    induced(&sheet.markers, &sheet.circulation_elements(), sheet.period, sheet.images, sheet.desing, x, skip)
        + sheet.background
}

/// Velocity at `x` induced by free circulation elements `c_j` at `sources`.
pub fn element_velocity(sources: &[Vec3], circulation: &[Vec3], desing: f64, x: &Vec3) -> Vec3 {
    induced(sources, circulation, None, 0, desing, x, None)
}

/// Largest change of a marker velocity when one more ring of periodic images is summed.
pub fn image_truncation(sheet: &SheetState) -> f64 {
    if sheet.period.is_none() {
        return 0.0;
    }
    let mut wider = sheet.clone();
    wider.images = (sheet.images + 1).min(MAX_IMAGES);
    marker_velocities(sheet).iter().zip(marker_velocities(&wider)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Velocities of all markers.
pub fn marker_velocities(sheet: &SheetState) -> Vec<Vec3> {
    velocities_at(sheet, &sheet.markers, &sheet.circulation_elements())
}

fn velocities_at(sheet: &SheetState, pos: &[Vec3], circ: &[Vec3]) -> Vec<Vec3> {
    (0..pos.len())
        .into_par_iter()
        .map(|i| induced(pos, circ, sheet.period, sheet.images, sheet.desing, &pos[i], Some(i)) + sheet.background)
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepReport {
    pub time: f64,
    pub min_distance: f64,
    /// Some pair of markers came closer than `δ_BR / 10`.
    pub collision: bool,
}

/// Classical RK4 step of the markers; circulation elements are material and are projected back
/// onto the new tangent planes with their length preserved.
pub fn step(sheet: &SheetState, dt: f64) -> Result<(SheetState, StepReport), BrError> {
    if !(dt > 0.0) {
        return Err(BrError::InvalidStep(dt));
    }
    let circ = sheet.circulation_elements();
    let x0 = &sheet.markers;
    let shifted = |k: &[Vec3], a: f64| -> Vec<Vec3> { x0.iter().zip(k).map(|(x, v)| x + v * a).collect() };
    let k1 = velocities_at(sheet, x0, &circ);
    let k2 = velocities_at(sheet, &shifted(&k1, 0.5 * dt), &circ);
    let k3 = velocities_at(sheet, &shifted(&k2, 0.5 * dt), &circ);
    let k4 = velocities_at(sheet, &shifted(&k3, dt), &circ);
    let markers: Vec<Vec3> =
        (0..x0.len()).map(|i| x0[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0)).collect();
    let mut next = sheet.clone();
    next.markers = markers;
    next.time += dt;
    let (normals, weights) = next.geometry();
    for i in 0..next.len() {
        let c = circ[i];
        let n = normals[i];
        let mut t = c - n * c.dot(&n);
        let tn = t.norm();
        if tn > 0.0 {
            t *= c.norm() / tn;
        }
        next.strength[i] = if weights[i] > 0.0 { t / weights[i] } else { Vec3::zeros() };
    }
    next.area_weights = weights;
    let min_distance = min_distance(&next);
    let report = StepReport { time: next.time, min_distance, collision: min_distance < 0.1 * next.desing };
    Ok((next, report))
}

fn min_distance(sheet: &SheetState) -> f64 {
    let p = &sheet.markers;
    (0..p.len())
        .into_par_iter()
        .map(|i| {
            let mut m = f64::INFINITY;
            for j in i + 1..p.len() {
                let mut d = p[i] - p[j];
                if let Some((lx, ly)) = sheet.period {
                    d.x -= lx * (d.x / lx).round();
                    d.y -= ly * (d.y / ly).round();
                }
                m = m.min(d.norm());
            }
            m
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Diagnostics {
    /// `Σ γ_i w_i`.
    pub circulation: Vec3,
    pub area: f64,
    /// Largest second difference of the marker grid.
    pub curvature_proxy: f64,
    pub tangential_residual: f64,
}

pub fn diagnostics(sheet: &SheetState) -> Diagnostics {
    if sheet.is_empty() {
        return Diagnostics { circulation: Vec3::zeros(), area: 0.0, curvature_proxy: 0.0, tangential_residual: 0.0 };
    }
    let (hx, hy) = sheet.spacing;
    let p = &sheet.markers;
    let mut curv: f64 = 0.0;
    let periodic = sheet.period.is_some();
    for j in 0..sheet.ny as isize {
        for i in 0..sheet.nx as isize {
            let c = sheet.neighbor(p, i, j);
            if periodic || (i > 0 && i < sheet.nx as isize - 1) {
                let d = sheet.neighbor(p, i + 1, j) - c * 2.0 + sheet.neighbor(p, i - 1, j);
                curv = curv.max(d.norm() / (hx * hx));
            }
            if periodic || (j > 0 && j < sheet.ny as isize - 1) {
                let d = sheet.neighbor(p, i, j + 1) - c * 2.0 + sheet.neighbor(p, i, j - 1);
                curv = curv.max(d.norm() / (hy * hy));
            }
        }
    }
    Diagnostics {
        circulation: sheet.circulation_elements().iter().sum(),
        area: sheet.area_weights.iter().sum(),
        curvature_proxy: curv,
        tangential_residual: sheet.tangential_residual(),
    }
}

/// Result of evolving a sheet for a number of steps.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionReport {
    pub steps: usize,
    pub max_normal_drift: f64,
    pub circulation_drift: f64,
    pub collision: bool,
}

/// Runs `steps` RK4 steps; normal drift is measured along the initial marker normals.
pub fn evolve(
    sheet: &SheetState,
    dt: f64,
    steps: usize,
    mut on_step: impl FnMut(usize, &SheetState),
) -> Result<(SheetState, EvolutionReport), BrError> {
    let n0 = sheet.normals();
    let c0 = diagnostics(sheet).circulation;
    let mut s = sheet.clone();
    let mut collision = false;
    let mut drift: f64 = 0.0;
    for k in 0..steps {
        let (next, rep) = step(&s, dt)?;
        collision |= rep.collision;
        s = next;
        for ((x, x0), n) in s.markers.iter().zip(&sheet.markers).zip(&n0) {
            drift = drift.max((x - x0).dot(n).abs());
        }
        on_step(k + 1, &s);
    }
    let circulation_drift = (diagnostics(&s).circulation - c0).norm();
    Ok((s, EvolutionReport { steps, max_normal_drift: drift, circulation_drift, collision }))
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementReport {
    pub deltas: Vec<f64>,
    /// `max_i |v_{δ_k}(X_i) − v_{δ_{k+1}}(X_i)|`.
    pub differences: Vec<f64>,
    /// Observed orders between consecutive differences.
    pub slopes: Vec<f64>,
    pub slope: f64,
}

/// Convergence order of the marker velocities as `δ_BR` decreases along `deltas`.
pub fn refinement_slope(sheet: &SheetState, deltas: &[f64]) -> Result<RefinementReport, BrError> {
    if deltas.len() < 3 {
        return Err(BrError::Grid("need at least three desingularizations".into()));
    }
    let vels = deltas
        .iter()
        .map(|&d| {
            if !(d > 0.0) {
                return Err(BrError::InvalidDesing(d));
            }
            let mut s = sheet.clone();
            s.desing = d;
            Ok(marker_velocities(&s))
        })
        .collect::<Result<Vec<_>, BrError>>()?;
    let differences: Vec<f64> =
        vels.windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)).collect();
    let slopes: Vec<f64> = (0..differences.len() - 1)
        .map(|k| (differences[k] / differences[k + 1]).ln() / (deltas[k + 1] / deltas[k + 2]).ln())
        .collect();
    Ok(RefinementReport { deltas: deltas.to_vec(), slope: *slopes.last().unwrap(), differences, slopes })
}
