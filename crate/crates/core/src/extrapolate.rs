//! Sequence acceleration for limits over geometric parameter grids.

use crate::geometry::Vec3;

/// Aitken Δ² transform; falls back to the newest term when the second difference vanishes.
pub fn aitken(a: &[f64]) -> Vec<f64> {
    a.windows(3)
        .map(|w| {
            let d1 = w[1] - w[0];
            let d2 = w[2] - 2.0 * w[1] + w[0];
            if d2.abs() <= 1e-14 * (w[0].abs() + w[1].abs() + w[2].abs()) || d2 == 0.0 {
                w[2]
            } else {
                let v = w[0] - d1 * d1 / d2;
                if v.is_finite() {
                    v
                } else {
                    w[2]
                }
            }
        })
        .collect()
}

pub fn aitken_vec(a: &[Vec3]) -> Vec<Vec3> {
    let comps: Vec<Vec<f64>> = (0..3).map(|i| aitken(&a.iter().map(|v| v[i]).collect::<Vec<_>>())).collect();
    (0..comps[0].len()).map(|j| Vec3::new(comps[0][j], comps[1][j], comps[2][j])).collect()
}

/// Richardson column for values at `h, h/2, h/4, …` with error `Σ c_p h^p`, eliminating
/// `p = 1..=levels`. The result has `values.len() − levels` entries.
pub fn richardson(values: &[f64], levels: usize) -> Vec<f64> {
    let mut col = values.to_vec();
    for p in 1..=levels {
        if col.len() < 2 {
            break;
        }
        let f = 2f64.powi(p as i32);
        col = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    col
}

/// `max − min` of the slice; zero when empty.
pub fn spread(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn aitken_is_exact_on_geometric_sequences() {
        let a: Vec<f64> = (0..6).map(|k| 3.0 + 0.7 * 0.5f64.powi(k)).collect();
        for v in aitken(&a) {
            assert_abs_diff_eq!(v, 3.0, epsilon = 1e-13);
        }
        assert_eq!(aitken(&[1.0, 1.0, 1.0]), vec![1.0]);
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let vals: Vec<f64> = (1..8)
            .map(|j| {
                let h = 0.5f64.powi(j);
                2.0 - h + h * h / 3.0
            })
            .collect();
        for v in richardson(&vals, 2) {
            assert_abs_diff_eq!(v, 2.0, epsilon = 1e-13);
        }
        assert_eq!(spread(&[1.0, 3.0, 2.0]), 2.0);
    }
}
