use super::{CurlMeasure, FieldError, Singular, VectorField};
use crate::geometry::{Breaks, SurfacePatch, Vec3};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum CatalogName {
    Newtonian,
    LineVortex,
    Annuli,
    RigidRotation,
    OscillatingGradient,
    PlaneWaveEm,
}

impl CatalogName {
    pub const ALL: [CatalogName; 6] = [
        CatalogName::Newtonian,
        CatalogName::LineVortex,
        CatalogName::Annuli,
        CatalogName::RigidRotation,
        CatalogName::OscillatingGradient,
        CatalogName::PlaneWaveEm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CatalogName::Newtonian => "newtonian",
            CatalogName::LineVortex => "line_vortex",
            CatalogName::Annuli => "annuli",
            CatalogName::RigidRotation => "rigid_rotation",
            CatalogName::OscillatingGradient => "oscillating_gradient",
            CatalogName::PlaneWaveEm => "plane_wave_em",
        }
    }
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogName {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| FieldError::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: CatalogName,
    pub field: VectorField,
    pub curl: CurlMeasure,
    /// Jump locations of the field, for splitting quadrature.
    pub breaks: Breaks,
}

/// Number of annuli kept; the remaining mass is below `2^{-60}`.
pub const ANNULI_LEVELS: usize = 60;
/// Half-height of the cylinder `B₂′ × (−2, 2)` carrying line and tube supports.
pub const AMBIENT_HALF_HEIGHT: f64 = 2.0;

/// `η = Σ_k (−1)^{k+1} 𝟙_{A_k}` with `A_k = {1 − 2^{−k} < r < 1 − 2^{−k−1}}`.
pub fn annuli_eta(r: f64) -> f64 {
    if !(r > 0.5 && r < 1.0) {
        return 0.0;
    }
    // r ∈ A_k ⟺ 2^{−k−1} < 1 − r < 2^{−k}.
    let k = (-(1.0 - r).log2()).floor() as i64;
    let k = k.max(1);
    let lo = 1.0 - 2f64.powi(-(k as i32));
    if r <= lo || k as usize > ANNULI_LEVELS {
        return 0.0;
    }
    if k % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Jump radii `1 − 2^{−k}` of `η`.
pub fn annuli_radii() -> Vec<f64> {
    (1..=ANNULI_LEVELS as i32).map(|k| 1.0 - 2f64.powi(-k)).collect()
}

/// Interior trace `F × e₃ = −η x′/|x′|` of the annuli field on `{x₃ = 0}`.
pub fn annuli_trace(x: &Vec3) -> Vec3 {
    let r = x.xy().norm();
    if r == 0.0 {
        return Vec3::zeros();
    }
    -Vec3::new(x.x, x.y, 0.0) * (annuli_eta(r) / r)
}

/// Layer index `j` with `x₃ ∈ (2^{−j−1}, 2^{−j}]`; `None` outside `(0, 1]`.
fn layer(z: f64) -> Option<i32> {
    (z > 0.0 && z <= 1.0).then(|| (-z.log2()).floor() as i32)
}

pub fn catalog(name: &str) -> Result<CatalogEntry, FieldError> {
    let name: CatalogName = name.parse()?;
    Ok(entry(name))
}

pub fn entry(name: CatalogName) -> CatalogEntry {
    let h = AMBIENT_HALF_HEIGHT;
    let (field, curl, breaks) = match name {
        CatalogName::Newtonian => (
            VectorField::new("newtonian", |x| -x / (4.0 * PI * x.norm().powi(3)))
                .with_curl(|_| Vec3::zeros())
                .with_p(1.5)
                .with_singular(Singular::Point(Vec3::zeros())),
            CurlMeasure::zero(),
            Breaks::None,
        ),
        CatalogName::LineVortex => (
            VectorField::new("line_vortex", |x| {
                let r2 = x.x * x.x + x.y * x.y;
                Vec3::new(-x.y / r2, x.x / r2, x.z) / (2.0 * PI)
            })
            .with_curl(|_| Vec3::zeros())
            .with_p(2.0)
            .with_singular(Singular::Line { point: Vec3::zeros(), dir: Vec3::z() }),
            CurlMeasure::zero().line(Vec3::new(0.0, 0.0, -h), Vec3::new(0.0, 0.0, h), |_| Vec3::z()),
            Breaks::None,
        ),
        CatalogName::Annuli => {
            let field = VectorField::new("annuli", |x| {
                let r = x.xy().norm();
                if r == 0.0 {
                    return Vec3::zeros();
                }
                Vec3::new(x.y, -x.x, 0.0) * (annuli_eta(r) / r)
            })
            .with_curl(|x| {
                let r = x.xy().norm();
                if r == 0.0 {
                    Vec3::zeros()
                } else {
                    -Vec3::z() * (annuli_eta(r) / r)
                }
            })
            .with_singular(Singular::Surface(SurfacePatch::tube(
                Vec3::new(0.0, 0.0, -h),
                1.0,
                Vec3::z(),
                2.0 * h,
                true,
            )));
            let mut mu = CurlMeasure::zero().lebesgue(|x| {
                let r = x.xy().norm();
                if r == 0.0 {
                    Vec3::zeros()
                } else {
                    -Vec3::z() * (annuli_eta(r) / r)
                }
            });
            for (k, r) in annuli_radii().into_iter().enumerate() {
                // Jump of −η e_φ across r: density e_r × [F] = −[η] e₃.
                let jump = if k == 0 { 1.0 } else { 2.0 * annuli_eta(r + 1e-3 * (1.0 - r)) };
                mu = mu.sheet(SurfacePatch::tube(Vec3::new(0.0, 0.0, -h), r, Vec3::z(), 2.0 * h, false), move |_| {
                    -Vec3::z() * jump
                });
            }
            let mut radii = annuli_radii();
            radii.push(1.0);
            (field, mu, Breaks::Radii { center: Vec3::zeros(), radii })
        }
        CatalogName::RigidRotation => (
            VectorField::new("rigid_rotation", |x| Vec3::new(-x.y, x.x, 0.0)).with_curl(|_| Vec3::new(0.0, 0.0, 2.0)),
            CurlMeasure::zero().lebesgue(|_| Vec3::new(0.0, 0.0, 2.0)),
            Breaks::None,
        ),
        CatalogName::OscillatingGradient => (
            VectorField::new("oscillating_gradient", |x| match layer(x.z) {
                Some(j) => Vec3::new(0.0, 0.0, if j % 2 == 0 { 1.0 } else { -1.0 }),
                None => Vec3::zeros(),
            })
            .with_curl(|_| Vec3::zeros())
            .with_singular(Singular::Plane { point: Vec3::zeros(), normal: Vec3::z() }),
            CurlMeasure::zero(),
            Breaks::None,
        ),
        CatalogName::PlaneWaveEm => {
            let w = PlaneWave::default();
            let e = w.electric(0.0);
            let c = e.clone();
            (e, CurlMeasure::zero().lebesgue(move |x| c.curl(x)), Breaks::None)
        }
    };
    CatalogEntry { name, field, curl, breaks }
}

/// `E = (0, f(x₁ − t), 0)`, `H = (0, 0, f(x₁ − t))` with `f = sin(k·)`.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub k: f64,
}

impl Default for PlaneWave {
    fn default() -> Self {
        Self { k: 1.0 }
    }
}

impl PlaneWave {
    pub fn electric(&self, t: f64) -> VectorField {
        let k = self.k;
        VectorField::new("plane_wave_e", move |x| Vec3::new(0.0, (k * (x.x - t)).sin(), 0.0))
            .with_curl(move |x| Vec3::new(0.0, 0.0, k * (k * (x.x - t)).cos()))
    }

    pub fn magnetic(&self, t: f64) -> VectorField {
        let k = self.k;
        VectorField::new("plane_wave_h", move |x| Vec3::new(0.0, 0.0, (k * (x.x - t)).sin()))
    }

    pub fn magnetic_rate(&self, t: f64) -> VectorField {
        let k = self.k;
        VectorField::new("plane_wave_dh", move |x| Vec3::new(0.0, 0.0, -k * (k * (x.x - t)).cos()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_levels() {
        assert_eq!(annuli_eta(0.3), 0.0);
        assert_eq!(annuli_eta(0.6), 1.0);
        assert_eq!(annuli_eta(0.8), -1.0);
        assert_eq!(annuli_eta(0.9), 1.0);
        assert_eq!(annuli_eta(1.2), 0.0);
    }

    #[test]
    fn names_round_trip() {
        for n in CatalogName::ALL {
            assert_eq!(n.as_str().parse::<CatalogName>().unwrap(), n);
        }
        assert!(matches!(catalog("vortex"), Err(FieldError::UnknownName(_))));
    }
}
