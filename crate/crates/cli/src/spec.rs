//! `kind:key=value,...` geometry specs.

use curlflux::geometry::{SolidRegion, SurfacePatch};
use curlflux::Vec3;
use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct Spec {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
}

impl FromStr for Spec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for kv in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("expected key=value, got `{kv}`"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("`{}` is not a number", v.trim()))?;
            params.insert(k.trim().to_string(), v);
        }
        Ok(Spec { kind: kind.trim().to_string(), params })
    }
}

impl Spec {
    fn take(&self, allowed: &[(&str, f64)]) -> Result<Vec<f64>, String> {
        if let Some(k) = self.params.keys().find(|k| !allowed.iter().any(|a| a.0 == k.as_str())) {
            return Err(format!("unknown parameter `{k}` for `{}`", self.kind));
        }
        Ok(allowed.iter().map(|(k, d)| self.params.get(*k).copied().unwrap_or(*d)).collect())
    }
}

/// Flat test surfaces with normal `e₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    Disk { r: f64, z: f64 },
    Annulus { r0: f64, r1: f64, z: f64 },
}

impl FromStr for Surface {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let spec: Spec = s.parse()?;
        let surface = match spec.kind.as_str() {
            "disk" => {
                let p = spec.take(&[("r", 1.0), ("z", 0.0)])?;
                Surface::Disk { r: p[0], z: p[1] }
            }
            "annulus" => {
                let p = spec.take(&[("r0", 0.5), ("r1", 1.0), ("z", 0.0)])?;
                Surface::Annulus { r0: p[0], r1: p[1], z: p[2] }
            }
            k => return Err(format!("unknown surface `{k}` (expected disk or annulus)")),
        };
        match surface {
            Surface::Disk { r, .. } if !(r > 0.0) => Err("disk radius must be positive".into()),
            Surface::Annulus { r0, r1, .. } if !(r0 > 0.0 && r1 > r0) => Err("annulus needs 0 < r0 < r1".into()),
            s => Ok(s),
        }
    }
}

impl Surface {
    pub fn patch(&self) -> SurfacePatch {
        match *self {
            Surface::Disk { r, z } => SurfacePatch::disk(Vec3::new(0.0, 0.0, z), r, Vec3::z()),
            Surface::Annulus { r0, r1, z } => SurfacePatch::annulus(Vec3::new(0.0, 0.0, z), r0, r1, Vec3::z()),
        }
    }

    /// Unit cylinder standing on the disk, whose bottom face is the surface.
    pub fn cylinder(&self) -> Option<SolidRegion> {
        match *self {
            Surface::Disk { r, z } => Some(SolidRegion::cylinder(Vec3::new(0.0, 0.0, z), r, 1.0)),
            Surface::Annulus { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Ball { r: f64 },
    HalfBall { r: f64 },
    Cylinder { r: f64, h: f64, z: f64 },
}

impl FromStr for Region {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let spec: Spec = s.parse()?;
        let region = match spec.kind.as_str() {
            "ball" => Region::Ball { r: spec.take(&[("r", 1.0)])?[0] },
            "half_ball" => Region::HalfBall { r: spec.take(&[("r", 1.0)])?[0] },
            "cylinder" => {
                let p = spec.take(&[("r", 1.0), ("h", 1.0), ("z", 0.0)])?;
                Region::Cylinder { r: p[0], h: p[1], z: p[2] }
            }
            k => return Err(format!("unknown region `{k}` (expected ball, half_ball or cylinder)")),
        };
        let ok = match region {
            Region::Ball { r } | Region::HalfBall { r } => r > 0.0,
            Region::Cylinder { r, h, .. } => r > 0.0 && h > 0.0,
        };
        if ok {
            Ok(region)
        } else {
            Err("region sizes must be positive".into())
        }
    }
}

impl Region {
    pub fn solid(&self) -> SolidRegion {
        match *self {
            Region::Ball { r } => SolidRegion::ball(Vec3::zeros(), r),
            Region::HalfBall { r } => SolidRegion::half_ball(Vec3::zeros(), r),
            Region::Cylinder { r, h, z } => SolidRegion::cylinder(Vec3::new(0.0, 0.0, z), r, h),
        }
    }
}

/// `NxM` marker grids.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got `{s}`"))?;
    let n = a.trim().parse().map_err(|_| format!("bad grid size `{a}`"))?;
    let m = b.trim().parse().map_err(|_| format!("bad grid size `{b}`"))?;
    Ok((n, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!("disk:r=0.5,z=0.5".parse::<Surface>().unwrap(), Surface::Disk { r: 0.5, z: 0.5 });
        assert_eq!("ball".parse::<Region>().unwrap(), Region::Ball { r: 1.0 });
        assert!("disk:q=1".parse::<Surface>().is_err());
        assert!("disk:r=-1".parse::<Surface>().is_err());
        assert!("cube".parse::<Region>().is_err());
        assert_eq!(parse_grid("64x32").unwrap(), (64, 32));
        assert!(parse_grid("64").is_err());
    }
}
