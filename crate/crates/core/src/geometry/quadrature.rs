use serde::Serialize;
use std::f64::consts::PI;

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `[a, b]` split at the interior `breaks`.
    pub fn integrate_split(&self, a: f64, b: f64, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        split_points(a, b, breaks).windows(2).map(|w| self.integrate(w[0], w[1], &mut f)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Sorted subdivision points of `[a, b]` (or `[b, a]`) including the endpoints.
pub fn split_points(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (1.0 + y.abs()));
    if a > b {
        pts.reverse();
    }
    pts
}

/// Equispaced trapezoid rule for a periodic integrand on `[a, a + period)`.
pub fn trapezoid_periodic(n: usize, a: f64, period: f64) -> Vec<(f64, f64)> {
    let h = period / n as f64;
    (0..n).map(|i| (a + (i as f64 + 0.5) * h, h)).collect()
}

/// Two-dimensional product rule on a parameter rectangle.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    /// Gauss–Legendre in both directions.
    pub fn tensor(nu: usize, nv: usize, u: (f64, f64), v: (f64, f64)) -> Self {
        let gu = GaussLegendre::new(nu);
        let gv = GaussLegendre::new(nv);
        let mut nodes = Vec::with_capacity(nu * nv);
        let mut weights = Vec::with_capacity(nu * nv);
        for (x, wx) in gu.on(u.0, u.1) {
            for (y, wy) in gv.on(v.0, v.1) {
                nodes.push([x, y]);
                weights.push(wx * wy);
            }
        }
        Self { nodes, weights, order: 2 * nu.min(nv) - 1 }
    }

    /// Gauss–Legendre in `u`, periodic trapezoid in `v`.
    pub fn gauss_trapezoid(nu: usize, nv: usize, u: (f64, f64), v: (f64, f64)) -> Self {
        let gu = GaussLegendre::new(nu);
        let tv = trapezoid_periodic(nv, v.0, v.1 - v.0);
        let mut nodes = Vec::with_capacity(nu * nv);
        let mut weights = Vec::with_capacity(nu * nv);
        for (x, wx) in gu.on(u.0, u.1) {
            for &(y, wy) in &tv {
                nodes.push([x, y]);
                weights.push(wx * wy);
            }
        }
        Self { nodes, weights, order: (2 * nu - 1).min(nv.saturating_sub(1)) }
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
