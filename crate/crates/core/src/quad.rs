//! One-dimensional adaptive quadrature and fixed rules.
//!
//! The workhorse is a globally adaptive 15-point Gauss–Kronrod scheme in the
//! style of QUADPACK `qag`: the panel with the largest error estimate is
//! bisected until the summed estimate meets the tolerance or the evaluation
//! budget runs out. Panel order is fully determined by the input, so results
//! are reproducible bit for bit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Absolute and relative tolerance pair; a result is accepted when its error
/// estimate is below `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
}

impl Tol {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Value of a quadrature together with its error estimate and cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub err: f64,
    pub evals: usize,
    pub converged: bool,
}

impl Integral {
    pub fn zero() -> Self {
        Self { value: 0.0, err: 0.0, evals: 0, converged: true }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, err: 0.0, evals: 0, converged: true }
    }

    pub fn add(&mut self, other: Integral) {
        self.value += other.value;
        self.err += other.err;
        self.evals += other.evals;
        self.converged &= other.converged;
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.err *= factor.abs();
        self
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    // insertion counter, breaks ties deterministically
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// Single 15-point Kronrod panel: returns (value, error estimate).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    (res_k * half, err)
}

/// Globally adaptive Gauss–Kronrod quadrature on `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol, max_evals: usize) -> Integral {
    integrate_with_breaks(f, &[a, b], tol, max_evals)
}

/// Adaptive quadrature over consecutive intervals of `breaks` (sorted, at
/// least two entries). Interior break points mark known kinks of `f`.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    tol: Tol,
    max_evals: usize,
) -> Integral {
    if breaks.len() < 2 {
        return Integral::zero();
    }
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut evals = 0;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, err) = gk15(&mut f, a, b);
        evals += 15;
        total += value;
        total_err += err;
        heap.push(Panel { a, b, value, err, seq });
        seq += 1;
    }
    let mut converged = true;
    let mut frozen: Vec<Panel> = Vec::new();
    while total_err > tol.target(total) {
        if evals + 30 > max_evals {
            converged = false;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-14 * worst.a.abs().max(worst.b.abs()).max(1e-300) {
            // cannot refine further
            frozen.push(worst);
            if heap.is_empty() {
                converged = false;
                break;
            }
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1, seq });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2, seq: seq + 1 });
        seq += 2;
    }
    // re-sum in panel order so that the reported value does not carry drift
    // from the running updates
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = pairwise_sum(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
    let err = panels.iter().map(|p| p.err).sum::<f64>();
    if err > tol.target(value) {
        converged = false;
    }
    Integral { value, err, evals, converged }
}

/// `∫_r^∞ f(ρ) dρ` for integrands decaying like `ρ^{-1-a}` (`a > 0`).
///
/// The substitution `ρ = r w^{-1/a}` maps the tail onto `(0, 1]` where the
/// transformed integrand stays bounded. Break points given in `ρ` are mapped
/// to `w`.
pub fn tail_integral<F: FnMut(f64) -> f64>(
    mut f: F,
    r: f64,
    a: f64,
    breaks: &[f64],
    tol: Tol,
    max_evals: usize,
) -> Integral {
    debug_assert!(a > 0.0 && r > 0.0);
    let scale = 1.0 / (a * r.powf(a));
    let mut wb: Vec<f64> = breaks
        .iter()
        .filter(|&&b| b > r && b.is_finite())
        .map(|&b| (b / r).powf(-a))
        .collect();
    wb.push(0.0);
    wb.push(1.0);
    sort_dedup(&mut wb);
    let g = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let rho = r * w.powf(-1.0 / a);
        if !rho.is_finite() {
            return 0.0;
        }
        let v = f(rho);
        if v == 0.0 {
            0.0
        } else {
            v * rho.powf(1.0 + a) * scale
        }
    };
    integrate_with_breaks(g, &wb, tol, max_evals)
}

pub fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
}

/// Pairwise (cascade) summation with fixed association order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    assert!(m >= 1);
    let mut out = vec![(0.0, 0.0); m];
    for i in 0..(m + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p1 = x;
                p0 = 1.0;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[m - 1 - i] = (x, w);
    }
    if m == 1 {
        out[0] = (0.0, 2.0);
    }
    out
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` panels of `m` nodes.
pub fn composite_gl(a: f64, b: f64, panels: usize, m: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(m);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * m);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for &(x, w) in &base {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// Quadrature rule on a set of unit directions: `(direction, weight)` pairs.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<([f64; 3], f64)>,
}

impl SphereRule {
    /// Rule on the full unit sphere `S^{n-1}`; weights sum to its measure.
    /// `m` controls the resolution (ignored for n = 1).
    pub fn full(n: usize, m: usize) -> Self {
        let mut nodes = Vec::new();
        match n {
            1 => {
                nodes.push(([1.0, 0.0, 0.0], 1.0));
                nodes.push(([-1.0, 0.0, 0.0], 1.0));
            }
            2 => {
                let w = 2.0 * PI / m as f64;
                for j in 0..m {
                    let t = w * (j as f64 + 0.5);
                    nodes.push(([t.cos(), t.sin(), 0.0], w));
                }
            }
            3 => {
                let naz = 2 * m;
                let waz = 2.0 * PI / naz as f64;
                for (z, wz) in gauss_legendre(m) {
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    for j in 0..naz {
                        let t = waz * (j as f64 + 0.5);
                        nodes.push(([rho * t.cos(), rho * t.sin(), z], wz * waz));
                    }
                }
            }
            _ => panic!("sphere rules are implemented for n <= 3"),
        }
        Self { dim: n, nodes }
    }

    /// Rule on a half sphere for integrands even under `θ -> -θ`; weights sum
    /// to half the sphere measure.
    pub fn half(n: usize, m: usize) -> Self {
        let mut nodes = Vec::new();
        match n {
            1 => nodes.push(([1.0, 0.0, 0.0], 1.0)),
            2 => {
                let w = PI / m as f64;
                for j in 0..m {
                    let t = w * (j as f64 + 0.5);
                    nodes.push(([t.cos(), t.sin(), 0.0], w));
                }
            }
            3 => {
                let naz = 2 * m;
                let waz = 2.0 * PI / naz as f64;
                for (zz, wz) in gauss_legendre(m) {
                    let z = 0.5 * (zz + 1.0);
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    for j in 0..naz {
                        let t = waz * (j as f64 + 0.5);
                        nodes.push(([rho * t.cos(), rho * t.sin(), z], 0.5 * wz * waz));
                    }
                }
            }
            _ => panic!("sphere rules are implemented for n <= 3"),
        }
        Self { dim: n, nodes }
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }
}
