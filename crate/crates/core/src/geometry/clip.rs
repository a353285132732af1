/// Sub-intervals of `[a, b]` on which `inside` holds.
///
/// Candidate endpoints are the sign changes of each level function, located on a uniform
/// grid and refined by bisection; `inside` is then tested at the midpoint of each piece.
pub fn clip_intervals(
    a: f64,
    b: f64,
    grid: usize,
    levels: &dyn Fn(f64) -> Vec<f64>,
    inside: &dyn Fn(f64) -> bool,
) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let grid = grid.max(1);
    let h = (b - a) / grid as f64;
    let mut cuts = vec![a, b];
    let mut prev = levels(a);
    for i in 1..=grid {
        let x1 = if i == grid { b } else { a + h * i as f64 };
        let x0 = a + h * (i - 1) as f64;
        let cur = levels(x1);
        for (k, (p, c)) in prev.iter().zip(&cur).enumerate() {
            if (*p > 0.0) != (*c > 0.0) {
                cuts.push(bisect(x0, x1, *p > 0.0, &|x| levels(x)[k]));
            }
        }
        prev = cur;
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + y.abs()));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        if w[1] - w[0] <= 0.0 || !inside(0.5 * (w[0] + w[1])) {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.1 == w[0] => last.1 = w[1],
            _ => out.push((w[0], w[1])),
        }
    }
    out
}

fn bisect(mut lo: f64, mut hi: f64, lo_positive: bool, f: &dyn Fn(f64) -> f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
