//! Interpolants used to turn tabulated solutions back into fields.

use std::f64::consts::PI;

/// Natural cubic spline on strictly increasing knots.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && n == y.len());
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for second derivatives, natural ends
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (rhs - h0 * d[i - 1]) / diag;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Self { x, y, m }
    }

    /// Evaluates the spline; constant extrapolation of the end values.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Barycentric interpolant on Chebyshev points of the first kind on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl Chebyshev {
    /// The `m` nodes on `[a, b]` at which values must be supplied.
    pub fn nodes(a: f64, b: f64, m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| {
                let t = ((2 * j + 1) as f64 * PI / (2 * m) as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * t
            })
            .collect()
    }

    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Self {
        let m = values.len();
        assert!(m >= 1);
        let nodes = Self::nodes(a, b, m);
        let weights = (0..m)
            .map(|j| {
                let th = (2 * j + 1) as f64 * PI / (2 * m) as f64;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * th.sin()
            })
            .collect();
        Self { a, b, nodes, weights, values }
    }

    pub fn from_fn(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> Self {
        let vals = Self::nodes(a, b, m).into_iter().map(f).collect();
        Self::new(a, b, vals)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&x, &w), &v) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = t - x;
            if d == 0.0 {
                return v;
            }
            let q = w / d;
            num += q * v;
            den += q;
        }
        num / den
    }
}
