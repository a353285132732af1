use super::{FieldError, VectorField};
use crate::geometry::Vec3;
use nalgebra::Matrix3;

/// Second-order central-difference curl; refuses stencils within `2h` of the singular set.
pub fn numeric_curl(field: &VectorField, x: &Vec3, h: f64) -> Result<Vec3, FieldError> {
    if field.singular_distance(x) <= 2.0 * h {
        return Err(FieldError::StencilTouchesSingularity { point: [x.x, x.y, x.z], h });
    }
    let j = jacobian2(&|y| field.eval(y), x, h);
    Ok(curl_of(&j))
}

fn curl_of(j: &Matrix3<f64>) -> Vec3 {
    // j[(i, k)] = ∂_k F_i
    Vec3::new(j[(2, 1)] - j[(1, 2)], j[(0, 2)] - j[(2, 0)], j[(1, 0)] - j[(0, 1)])
}

fn jacobian2(f: &dyn Fn(&Vec3) -> Vec3, x: &Vec3, h: f64) -> Matrix3<f64> {
    let mut j = Matrix3::zeros();
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = h;
        let d = (f(&(x + e)) - f(&(x - e))) / (2.0 * h);
        j.set_column(k, &d);
    }
    j
}

/// Fourth-order central-difference Jacobian, `J[(i, k)] = ∂_k F_i`.
pub fn jacobian4(f: &dyn Fn(&Vec3) -> Vec3, x: &Vec3, h: f64) -> Matrix3<f64> {
    let mut j = Matrix3::zeros();
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = h;
        let d = (f(&(x - e * 2.0)) - f(&(x + e * 2.0)) + (f(&(x + e)) - f(&(x - e))) * 8.0) / (12.0 * h);
        j.set_column(k, &d);
    }
    j
}

pub fn curl4(f: &dyn Fn(&Vec3) -> Vec3, x: &Vec3, h: f64) -> Vec3 {
    curl_of(&jacobian4(f, x, h))
}

pub fn divergence4(f: &dyn Fn(&Vec3) -> Vec3, x: &Vec3, h: f64) -> f64 {
    jacobian4(f, x, h).trace()
}

pub fn gradient4(f: &dyn Fn(&Vec3) -> f64, x: &Vec3, h: f64) -> Vec3 {
    let mut g = Vec3::zeros();
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = h;
        g[k] = (f(&(x - e * 2.0)) - f(&(x + e * 2.0)) + (f(&(x + e)) - f(&(x - e))) * 8.0) / (12.0 * h);
    }
    g
}
