//! Extension to the upper half space by convolution with
//! `P(x, y) = B y^{2s} / (|x|^2 + y^2)^{(n+2s)/2}` and recovery of
//! `(-Δ)^s u` from the weighted conormal derivative `y^{1-2s} ∂_y v`.
//!
//! Everything is written in terms of increments `u(x ± ρθ) - u(x)` so that the
//! convolution keeps full relative accuracy as `y → 0`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, usage, Error, Result};
use crate::field::{point, Point, ScalarField};
use crate::pointwise::{check_guarded_order, OpValue, QuadratureSpec};
use crate::quad::{self, composite_gl, pairwise_sum, Integral};
use crate::special::{b_half_ns, c_ns, sphere_measure};
use crate::spectral::{frac_lap_spectral_points, periodization_correction, PeriodicGrid, SampledField};

/// Default heights `2^{-k}`, `k = 3..=10`.
pub fn default_levels() -> Vec<f64> {
    (3..=10).map(|k| 2f64.powi(-k)).collect()
}

/// The Poisson integral converges when `u` grows slower than `|x|^{2s}`.
fn check_growth(field: &ScalarField, s: f64) -> Result<()> {
    if !field.decay.in_l1s(s) {
        return Err(precondition(format!("'{}' grows too fast for the order-{s} Poisson integral", field.name)));
    }
    Ok(())
}

/// Symmetric or antisymmetric radial integral along `±θ` from `x`:
/// `∫_0^∞ (u(x+ρθ) ± u(x-ρθ) - (1±1) u(x)) W(ρ) dρ`, where `W(ρ) = O(ρ^{-1-a})`.
/// `floor` raises the absolute tolerance to the rounding noise of the differences.
#[allow(clippy::too_many_arguments)]
fn radial(
    field: &ScalarField,
    x: &Point,
    dir: &[f64; 3],
    ux: f64,
    odd: bool,
    scale_y: f64,
    a: f64,
    w: &dyn Fn(f64) -> f64,
    floor: f64,
    spec: &QuadratureSpec,
) -> Integral {
    let tol = quad::Tol::new(spec.tol_abs.max(floor), spec.tol_rel);
    let n = field.dim;
    let at = |rho: f64, sg: f64| {
        let mut p = *x;
        for i in 0..n {
            p[i] += sg * rho * dir[i];
        }
        field.eval(&p)
    };
    let f = |rho: f64| {
        let d = if odd { at(rho, 1.0) - at(rho, -1.0) } else { at(rho, 1.0) + at(rho, -1.0) - 2.0 * ux };
        d * w(rho)
    };
    let mut kinks: Vec<f64> = field.line_breaks(&x[..n], &dir[..n]).into_iter().map(f64::abs).collect();
    let mut r_mid = spec.r_mid;
    if let Some(rs) = field.decay.support_radius() {
        r_mid = r_mid.max(crate::field::norm(&x[..n]) + rs + 1e-9);
    }
    // the kernel varies on the scale y
    for m in [0.25, 1.0, 4.0] {
        kinks.push(m * scale_y);
    }
    let mut breaks = vec![0.0, r_mid];
    breaks.extend(kinks.iter().copied().filter(|&k| k > 0.0 && k < r_mid));
    quad::sort_dedup(&mut breaks);
    let mut total = quad::integrate_with_breaks(f, &breaks, tol, spec.max_nodes);
    let outer: Vec<f64> = kinks.into_iter().filter(|&k| k > r_mid).collect();
    total.add(quad::tail_integral(f, r_mid, a - field.decay.growth(), &outer, tol, spec.max_nodes));
    total
}

/// Rounding noise of `∫ d(ρ) W(ρ) dρ` when `|d| ≈ 4 eps |u(x)|` and `∫ W = mass`.
fn noise_floor(ux: f64, mass: f64) -> f64 {
    64.0 * f64::EPSILON * ux.abs() * mass
}

fn converged(i: Integral, what: &str) -> Result<f64> {
    if !i.converged {
        return Err(Error::Convergence { msg: format!("{what} quadrature did not converge"), best: i.value, err_est: i.err });
    }
    Ok(i.value)
}

/// `q(x, y) = ∫ P(ζ, y)(u(x+ζ) - u(x)) dζ / y^{2s}`, so that `v = u + y^{2s} q`.
fn increment(field: &ScalarField, x: &Point, y: f64, s: f64, spec: &QuadratureSpec) -> Result<f64> {
    let n = field.dim;
    let b = b_half_ns(n, s)?;
    let p = 0.5 * (n as f64 + 2.0 * s);
    let ux = field.eval(x);
    let rule = spec.half_rule(n);
    let w = |rho: f64| rho.powi(n as i32 - 1) * (rho * rho + y * y).powf(-p);
    // ∫ W over a full line is y^{-2s} / (B |S^{n-1}|) by the kernel normalization
    let mass = y.powf(-2.0 * s) / (b * sphere_measure(n)?);
    let floor = noise_floor(ux, mass);
    let mut parts = Vec::with_capacity(rule.nodes.len());
    for (dir, wt) in &rule.nodes {
        let i = radial(field, x, dir, ux, false, y, 2.0 * s, &w, floor, spec);
        parts.push(wt * converged(i, "extension")?);
    }
    Ok(b * pairwise_sum(&parts))
}

/// `v(x, y)`.
pub fn extend(field: &ScalarField, x: &[f64], y: f64, s: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    check_guarded_order(s)?;
    if !(y > 0.0) {
        return Err(domain(format!("extension height must be positive, got {y}")));
    }
    check_growth(field, s)?;
    let xp = point(&x[..field.dim]);
    let q = increment(field, &xp, y, s, spec)?;
    Ok(field.eval(&xp) + y.powf(2.0 * s) * q)
}

/// `(∂_{x_i} v)_i` and `y^{1-2s} ∂_y v` at `(x, y)`.
pub fn extension_gradient(field: &ScalarField, x: &[f64], y: f64, s: f64, spec: &QuadratureSpec) -> Result<(Point, f64)> {
    check_guarded_order(s)?;
    if !(y > 0.0) {
        return Err(domain(format!("extension height must be positive, got {y}")));
    }
    check_growth(field, s)?;
    let n = field.dim;
    let xp = point(&x[..n]);
    let b = b_half_ns(n, s)?;
    let ns = n as f64 + 2.0 * s;
    let p = 0.5 * ns;
    let ux = field.eval(&xp);
    let rule = spec.half_rule(n);
    let y2 = y * y;
    // y^{1-2s} ∂_y P / B = 2s (ρ²+y²)^{-p} - (n+2s) y² (ρ²+y²)^{-p-1}
    let wy = |rho: f64| {
        let q = rho * rho + y2;
        rho.powi(n as i32 - 1) * (2.0 * s * q.powf(-p) - ns * y2 * q.powf(-p - 1.0))
    };
    // ∂_x P(x - ξ) along ξ = x + ρθ is (n+2s) B y^{2s} ρ θ (ρ²+y²)^{-p-1}
    let wx = |rho: f64| rho.powi(n as i32) * (rho * rho + y2).powf(-p - 1.0);
    let mass = y.powf(-2.0 * s) / (b * sphere_measure(n)?);
    let (floor_y, floor_x) = (noise_floor(ux, (1.0 + ns) * mass), noise_floor(ux, mass / y));
    let mut gy = Vec::new();
    let mut gx: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (dir, wt) in &rule.nodes {
        let iy = radial(field, &xp, dir, ux, false, y, 2.0 * s, &wy, floor_y, spec);
        gy.push(wt * converged(iy, "conormal")?);
        let ix = radial(field, &xp, dir, ux, true, y, 1.0 + 2.0 * s, &wx, floor_x, spec);
        let vx = converged(ix, "tangential")?;
        for i in 0..n {
            gx[i].push(wt * vx * dir[i]);
        }
    }
    let mut grad = [0.0; 3];
    let ys = y.powf(2.0 * s);
    for i in 0..n {
        grad[i] = b * ns * ys * pairwise_sum(&gx[i]);
    }
    Ok((grad, b * pairwise_sum(&gy)))
}

/// Fits `L(y) = L_0 + Σ_j a_j y^{e_j}` through `levels` (exactly when the
/// counts match, least squares otherwise) and returns `L_0`.
pub fn richardson(levels: &[(f64, f64)], exponents: &[f64]) -> Result<f64> {
    let m = exponents.len() + 1;
    if levels.len() < m {
        return Err(usage(format!("need at least {m} levels for {} correction terms", exponents.len())));
    }
    let mut a = DMatrix::zeros(levels.len(), m);
    let mut rhs = DVector::zeros(levels.len());
    for (i, &(y, l)) in levels.iter().enumerate() {
        a[(i, 0)] = 1.0;
        for (j, e) in exponents.iter().enumerate() {
            a[(i, j + 1)] = y.powf(*e);
        }
        rhs[i] = l;
    }
    let sol = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Internal(format!("extrapolation solve failed: {e}")))?;
    Ok(sol[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub op: OpValue,
    /// extrapolated `lim y^{1-2s} ∂_y v`
    pub limit: f64,
    /// proportionality used: `(-Δ)^s u = -kappa · limit`
    pub kappa: f64,
    /// `c_{n,s} / (2s B_{n,s})`, from the kernel expansion
    pub kappa_theory: f64,
    /// `(y, y^{1-2s} ∂_y v)` per level
    pub levels: Vec<(f64, f64)>,
}

/// Expansion exponents of `y^{1-2s} ∂_y v` near `y = 0` for smooth `u`.
pub fn trace_exponents(s: f64) -> [f64; 3] {
    [2.0 - 2.0 * s, 2.0, 4.0 - 2.0 * s]
}

fn conormal_limit(field: &ScalarField, x: &[f64], s: f64, levels: &[f64], spec: &QuadratureSpec) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    if levels.len() < 3 {
        return Err(usage("conormal trace needs at least three levels"));
    }
    let ratio = levels[1] / levels[0];
    if !(ratio > 0.0 && ratio < 1.0) || levels.windows(2).any(|w| ((w[1] / w[0]) - ratio).abs() > 1e-9 * ratio) {
        return Err(usage("levels must decrease in geometric progression"));
    }
    let mut seq = Vec::with_capacity(levels.len());
    for &y in levels {
        seq.push((y, extension_gradient(field, x, y, s, spec)?.1));
    }
    let ex = trace_exponents(s);
    let k = (ex.len() + 1).min(seq.len());
    let used = ex.len().min(k - 1);
    let last = &seq[seq.len() - k..];
    let l0 = richardson(last, &ex[..used])?;
    // second estimate from the window one level coarser
    let err = if seq.len() > k {
        let prev = &seq[seq.len() - k - 1..seq.len() - 1];
        (richardson(prev, &ex[..used])? - l0).abs()
    } else {
        (last[last.len() - 1].1 - l0).abs()
    };
    // raw values must approach the extrapolant
    let dev: Vec<f64> = seq.iter().map(|(_, l)| (l - l0).abs()).collect();
    let scale = l0.abs().max(1e-300);
    let monotone = dev.windows(2).all(|w| w[1] <= w[0] * 1.000_001 + 1e-11 * scale.max(1.0));
    if !monotone {
        return Err(Error::Convergence { msg: "conormal sequence does not approach its extrapolant monotonically".into(), best: l0, err_est: err });
    }
    Ok((l0, err, seq))
}

fn kappa_cache() -> &'static Mutex<HashMap<(usize, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Spectral value of `(-Δ)^s` of the gaussian at the origin, periodization corrected.
pub fn gaussian_reference(n: usize, s: f64) -> Result<f64> {
    let grid = match n {
        1 => PeriodicGrid::new(1, 40.0, 1024)?,
        2 => PeriodicGrid::new(2, 24.0, 256)?,
        _ => return Err(Error::Unsupported("calibration is available for n <= 2".into())),
    };
    let f = SampledField::sample(&crate::field::gaussian(n), grid)?;
    let pts = [[0.0; 3]];
    let raw = frac_lap_spectral_points(&f, s, &pts)?[0];
    let corr = periodization_correction(&f, s, &pts)?[0];
    Ok(raw - corr)
}

/// Calibrates `κ(n, s)` once: the ratio between the spectral value and the
/// extrapolated conormal limit for the gaussian at the origin.
pub fn calibrate_kappa(n: usize, s: f64, spec: &QuadratureSpec) -> Result<f64> {
    let key = (n, s.to_bits());
    if let Some(k) = kappa_cache().lock().expect("cache lock").get(&key) {
        return Ok(*k);
    }
    let reference = gaussian_reference(n, s)?;
    let (limit, _, _) = conormal_limit(&crate::field::gaussian(n), &[0.0; 3][..n], s, &default_levels(), spec)?;
    let kappa = -reference / limit;
    kappa_cache().lock().expect("cache lock").insert(key, kappa);
    Ok(kappa)
}

pub fn kappa_theory(n: usize, s: f64) -> Result<f64> {
    Ok(c_ns(n, s)? / (2.0 * s * b_half_ns(n, s)?))
}

/// `(-Δ)^s u(x) ≈ -κ lim_{y→0} y^{1-2s} ∂_y v(x, y)`.
pub fn conormal_trace(field: &ScalarField, x: &[f64], s: f64, levels: &[f64], spec: &QuadratureSpec) -> Result<TraceResult> {
    spec.validate()?;
    check_guarded_order(s)?;
    check_growth(field, s)?;
    let n = field.dim;
    let kappa = calibrate_kappa(n, s, spec)?;
    let (limit, err, seq) = conormal_limit(field, x, s, levels, spec)?;
    Ok(TraceResult {
        op: OpValue { value: -kappa * limit, err_est: kappa * err, nodes_used: 0 },
        limit,
        kappa,
        kappa_theory: kappa_theory(n, s)?,
        levels: seq,
    })
}

/// Extension of a base field with its order and quadrature settings; below
/// `y = 0` it is continued evenly.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    pub base: ScalarField,
    pub s: f64,
    pub spec: QuadratureSpec,
    pub y_levels: Vec<f64>,
}

impl ExtensionField {
    pub fn new(base: ScalarField, s: f64, spec: QuadratureSpec) -> Result<Self> {
        check_guarded_order(s)?;
        spec.validate()?;
        check_growth(&base, s)?;
        Ok(Self { base, s, spec, y_levels: default_levels() })
    }

    pub fn value(&self, x: &[f64], y: f64) -> Result<f64> {
        if y == 0.0 {
            return Ok(self.base.eval(x));
        }
        extend(&self.base, x, y.abs(), self.s, &self.spec)
    }

    pub fn levels_at(&self, x: &[f64]) -> Result<Vec<(f64, f64)>> {
        self.y_levels.iter().map(|&y| Ok((y, self.value(x, y)?))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualBox {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    Strong,
    Weak,
}

/// Residual of `div(|y|^{1-2s} ∇v) = 0`.
///
/// Strong mode: largest flux-form finite-difference residual on a 5-point
/// sample of centers per axis, box strictly inside `y > 0`. Weak mode (n = 1):
/// largest `|∫∫ |y|^{1-2s} ∇v·∇φ|` over ten bump test functions straddling
/// `y = 0`, for the evenly reflected field.
pub fn weighted_divergence_residual(ext: &ExtensionField, bx: &ResidualBox, h: f64, mode: ResidualMode) -> Result<f64> {
    if !(bx.x_hi > bx.x_lo && bx.y_hi > bx.y_lo && h > 0.0) {
        return Err(usage("residual box must be non-empty and the step positive"));
    }
    match mode {
        ResidualMode::Strong => strong_residual(ext, bx, h),
        ResidualMode::Weak => weak_residual(ext, bx),
    }
}

fn strong_residual(ext: &ExtensionField, bx: &ResidualBox, h: f64) -> Result<f64> {
    if bx.y_lo - h <= 0.0 {
        return Err(usage("strong residual box must stay away from y = 0"));
    }
    let n = ext.base.dim;
    let a = 1.0 - 2.0 * ext.s;
    let m = 5usize;
    let lin = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (m - 1) as f64;
    let mut centers: Vec<(Point, f64)> = Vec::new();
    let count = m.pow(n as u32);
    for idx in 0..count {
        let mut x = [0.0; 3];
        let mut r = idx;
        for xi in x.iter_mut().take(n) {
            *xi = lin(bx.x_lo, bx.x_hi, r % m);
            r /= m;
        }
        for k in 0..m {
            centers.push((x, lin(bx.y_lo, bx.y_hi, k)));
        }
    }
    use rayon::prelude::*;
    let res: Vec<f64> = centers
        .par_iter()
        .map(|(x, y)| -> Result<f64> {
            let v0 = ext.value(x, *y)?;
            let vp = ext.value(x, y + h)?;
            let vm = ext.value(x, y - h)?;
            let mut r = ((y + 0.5 * h).powf(a) * (vp - v0) - (y - 0.5 * h).powf(a) * (v0 - vm)) / (h * h);
            for i in 0..n {
                let (mut xp, mut xm) = (*x, *x);
                xp[i] += h;
                xm[i] -= h;
                r += y.powf(a) * (ext.value(&xp, *y)? - 2.0 * v0 + ext.value(&xm, *y)?) / (h * h);
            }
            Ok(r.abs())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

fn bump1(t: f64) -> (f64, f64) {
    if t.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let d = 1.0 - t * t;
    let v = (1.0 - 1.0 / d).exp();
    (v, v * (-2.0 * t / (d * d)))
}

/// Ten tensor bumps inside the box, each straddling `y = 0`:
/// `(x_c, y_c, half width in x, half height in y)`.
fn test_functions(bx: &ResidualBox) -> Vec<(f64, f64, f64, f64)> {
    let xw = bx.x_hi - bx.x_lo;
    let hy = bx.y_hi.min(-bx.y_lo);
    let mut out = Vec::new();
    for i in 0..5 {
        let xc = bx.x_lo + xw * (0.3 + 0.1 * i as f64);
        let wx = 0.3 * xw;
        for (j, yc) in [0.0, 0.25].iter().enumerate() {
            let yc = yc * hy * if i % 2 == 0 { 1.0 } else { -1.0 };
            let wy = (hy - yc.abs()) * if j == 0 { 1.0 } else { 0.9 };
            out.push((xc, yc, wx, wy));
        }
    }
    out
}

fn weak_residual(ext: &ExtensionField, bx: &ResidualBox) -> Result<f64> {
    if ext.base.dim != 1 {
        return Err(Error::Unsupported("weak residual is implemented for n = 1".into()));
    }
    if !(bx.y_lo < 0.0 && bx.y_hi > 0.0) {
        return Err(usage("weak residual box must straddle y = 0"));
    }
    let s = ext.s;
    let tests = test_functions(bx);
    let ymax = bx.y_hi.max(-bx.y_lo);
    // y = t², so |y|^{1-2s} dy = 2 t^{3-4s} dt
    let xs = composite_gl(bx.x_lo, bx.x_hi, 12, 8);
    let ts = composite_gl(0.0, ymax.sqrt(), 12, 8);
    use rayon::prelude::*;
    let nodes: Vec<(f64, f64, f64)> = xs.iter().flat_map(|&(x, wx)| ts.iter().map(move |&(t, wt)| (x, t, wx * wt))).collect();
    let grads: Vec<(f64, f64, f64, f64)> = nodes
        .par_iter()
        .map(|&(x, t, w)| -> Result<(f64, f64, f64, f64)> {
            let y = t * t;
            let (g, wy) = extension_gradient(&ext.base, &[x], y, s, &ext.spec)?;
            // weighted measure and fluxes on the upper sheet
            let jac = 2.0 * t;
            Ok((x, y, w * jac * y.powf(1.0 - 2.0 * s) * g[0], w * jac * wy))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    for (xc, yc, hx, hy) in tests {
        let terms: Vec<f64> = grads
            .iter()
            .map(|&(x, y, fx, fy)| {
                let (px, dpx) = bump1((x - xc) / hx);
                let mut acc = 0.0;
                // upper sheet at +y and reflected sheet at -y
                for sg in [1.0, -1.0] {
                    let (py, dpy) = bump1((sg * y - yc) / hy);
                    acc += fx * dpx / hx * py + sg * fy * px * dpy / hy;
                }
                acc
            })
            .collect();
        worst = worst.max(pairwise_sum(&terms).abs());
    }
    Ok(worst)
}
