use super::measure::{sheet_integral, CurlMeasure, MeasureRule};
use super::{finite_or, FieldError, VectorField};
use crate::geometry::{Shape, SolidRegion, SurfacePatch, Vec3};
use rayon::prelude::*;

/// Offset along the interface normal used for one-sided limits.
pub const ONE_SIDED_OFFSET: f64 = 1e-6;

/// `u⁺` on the side the interface normal points to, `u⁻` on the other.
#[derive(Debug, Clone)]
pub struct PiecewiseField {
    pub interface: SurfacePatch,
    pub plus: VectorField,
    pub minus: VectorField,
}

impl PiecewiseField {
    pub fn normal(&self) -> Vec3 {
        self.interface.normal(0.5, 0.0)
    }

    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        (x - self.interface.project(x)).dot(&self.normal())
    }

    /// `None` on the interface plane.
    pub fn eval(&self, x: &Vec3) -> Option<Vec3> {
        let s = self.signed_distance(x);
        if s > 0.0 {
            Some(self.plus.eval(x))
        } else if s < 0.0 {
            Some(self.minus.eval(x))
        } else {
            None
        }
    }

    pub fn trace_plus(&self, x: &Vec3) -> Vec3 {
        self.plus.eval(&(self.interface.project(x) + self.normal() * ONE_SIDED_OFFSET))
    }

    pub fn trace_minus(&self, x: &Vec3) -> Vec3 {
        self.minus.eval(&(self.interface.project(x) - self.normal() * ONE_SIDED_OFFSET))
    }

    /// Sheet density `ν × (u⁺ − u⁻)`.
    pub fn jump_density(&self, x: &Vec3) -> Vec3 {
        self.normal().cross(&(self.trace_plus(x) - self.trace_minus(x)))
    }

    pub fn as_field(&self) -> VectorField {
        let me = self.clone();
        VectorField::new(format!("{}|{}", self.plus.name, self.minus.name), move |x| {
            me.eval(x).unwrap_or_else(|| Vec3::from_element(f64::NAN))
        })
        .with_p(self.plus.p.min(self.minus.p))
        .with_singular(super::Singular::Surface(self.interface.clone()))
    }
}

pub fn make_vortex_sheet(
    u_plus: &VectorField,
    u_minus: &VectorField,
    interface: &SurfacePatch,
) -> Result<(PiecewiseField, CurlMeasure), FieldError> {
    if !matches!(interface.shape, Shape::Disk { .. } | Shape::Rect { .. }) {
        return Err(FieldError::Unsupported("vortex sheets need a planar interface".into()));
    }
    let pf = PiecewiseField { interface: interface.clone(), plus: u_plus.clone(), minus: u_minus.clone() };
    let (a, b) = (pf.clone(), pf.clone());
    let mu = CurlMeasure::zero()
        .lebesgue(move |x| if a.signed_distance(x) >= 0.0 { a.plus.curl(x) } else { a.minus.curl(x) })
        .sheet(interface.clone(), move |x| b.jump_density(x));
    Ok((pf, mu))
}

/// `|curl u⁺|(U⁺) + |curl u⁻|(U⁻) + ∫_{S ∩ U} |ν × (u⁺ − u⁻)| dH²`.
pub fn gluing_total_variation(
    field: &PiecewiseField,
    region: &SolidRegion,
    rule: &MeasureRule,
) -> Result<f64, FieldError> {
    let n = field.normal();
    let z0 = field.interface.point(0.0, 0.0).z;
    let interior = |part: &SolidRegion, side: &VectorField, sign: f64| -> Result<f64, FieldError> {
        part.volume_nodes(rule.volume)
            .par_iter()
            .filter(|v| sign * field.signed_distance(&v.x) > 0.0)
            .map(|v| finite_or(&v.x, v.w * side.curl(&v.x).norm()))
            .sum()
    };
    let horizontal = n.x.abs() < 1e-14 && n.y.abs() < 1e-14;
    let lebesgue = match (horizontal, region.split_at_height(z0)) {
        (true, Some((lower, upper))) => {
            let (below, above) = if n.z > 0.0 { (lower, upper) } else { (upper, lower) };
            interior(&above, &field.plus, 1.0)? + interior(&below, &field.minus, -1.0)?
        }
        _ => interior(region, &field.plus, 1.0)? + interior(region, &field.minus, -1.0)?,
    };
    let sheet = sheet_integral(&field.interface, &|x| field.jump_density(x).norm(), region, rule)?;
    Ok(lebesgue + sheet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_jump_density() {
        let disk = SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z());
        let (pf, _) = make_vortex_sheet(&VectorField::constant(Vec3::x()), &VectorField::zero(), &disk).unwrap();
        let d = pf.jump_density(&Vec3::new(0.2, 0.1, 0.0));
        assert_abs_diff_eq!((d - Vec3::y()).norm(), 0.0, epsilon = 1e-15);
        assert!(pf.eval(&Vec3::new(0.1, 0.1, 0.0)).is_none());
        let sphere = SurfacePatch::sphere(Vec3::zeros(), 1.0, true);
        assert!(make_vortex_sheet(&VectorField::zero(), &VectorField::zero(), &sphere).is_err());
    }
}
