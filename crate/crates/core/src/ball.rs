//! Potential theory on balls: the s-mean kernel, the Poisson kernel of the
//! ball, the fundamental solution, the Green function and the representation
//! formulas for the Dirichlet problem.

use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, usage, Error, Result};
use crate::field::{dist, dot, norm, point, Decay, Point, ScalarField, Smoothness, Surface};
use crate::interp::Chebyshev;
use crate::pointwise::QuadratureSpec;
use crate::quad::{self, pairwise_sum, Integral, SphereRule};
use crate::special::{a_ns, b_ns, check_dim, check_order, gamma, kappa_ns};

/// Dirichlet problem `(-Δ)^s u = f` in `B_r`, `u = g` outside.
#[derive(Debug, Clone)]
pub struct BallProblem {
    pub n: usize,
    pub r: f64,
    pub s: f64,
    pub f: Option<ScalarField>,
    pub g: Option<ScalarField>,
}

impl BallProblem {
    pub fn homogeneous(r: f64, s: f64, g: ScalarField) -> Self {
        Self { n: g.dim, r, s, f: None, g: Some(g) }
    }

    pub fn source(r: f64, s: f64, f: ScalarField) -> Self {
        Self { n: f.dim, r, s, f: Some(f), g: None }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.n)?;
        check_order(self.s)?;
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(domain(format!("ball radius must be positive, got {}", self.r)));
        }
        if self.f.is_none() && self.g.is_none() {
            return Err(usage("a ball problem needs a source f or exterior datum g"));
        }
        for fld in [&self.f, &self.g].into_iter().flatten() {
            if fld.dim != self.n {
                return Err(usage(format!("field '{}' has dimension {}, problem has {}", fld.name, fld.dim, self.n)));
            }
        }
        if let Some(g) = &self.g {
            if !g.decay.in_l1s(self.s) {
                return Err(precondition(format!("exterior datum '{}' is not in L^1_s", g.name)));
            }
        }
        Ok(())
    }
}

/// `A_r(y)`: zero on the closed ball, `a r^{2s} / ((|y|^2 - r^2)^s |y|^n)` outside.
pub fn mean_kernel(y: &[f64], r: f64, n: usize, s: f64) -> Result<f64> {
    let a = a_ns(n, s)?;
    let ry = norm(&y[..n]);
    if ry <= r {
        return Ok(0.0);
    }
    Ok(a * r.powf(2.0 * s) / ((ry * ry - r * r).powf(s) * ry.powi(n as i32)))
}

/// `P_r(x, y) = C ((r^2 - |x|^2)/(|y|^2 - r^2))^s |y - x|^{-n}` for `|x| < r < |y|`.
pub fn poisson_kernel_ball(x: &[f64], y: &[f64], r: f64, n: usize, s: f64) -> Result<f64> {
    let c = a_ns(n, s)?;
    let (rx, ry) = (norm(&x[..n]), norm(&y[..n]));
    if !(rx < r && r < ry) {
        return Err(domain(format!("Poisson kernel needs |x| < r < |y| (|x|={rx}, r={r}, |y|={ry})")));
    }
    Ok(c * ((r * r - rx * rx) / (ry * ry - r * r)).powf(s) * dist(&x[..n], &y[..n]).powi(-(n as i32)))
}

/// Exterior datum for [`exterior_integral`]: values, radial kinks along a
/// direction, growth exponent and support radius.
struct Exterior<'a> {
    eval: &'a (dyn Fn(&Point) -> f64 + Sync),
    kinks: &'a (dyn Fn(&[f64; 3]) -> Vec<f64> + Sync),
    growth: f64,
    support: Option<f64>,
}

fn ball_rule(n: usize, spec: &QuadratureSpec) -> SphereRule {
    SphereRule::full(n, spec.angular_nodes)
}

/// `∫_{|y|>r} h(y) (r^2 - |x|^2)^s / ((|y|^2 - r^2)^s |y - x|^n) dy`, without
/// the constant `C_{n,s}`. The radial variable is `σ = (|y|^2 - r^2)/r^2`,
/// with `σ = τ^{1/(1-s)}` on `(0, 1]` to absorb the endpoint singularity.
fn exterior_integral(n: usize, r: f64, s: f64, x: &Point, ext: &Exterior<'_>, spec: &QuadratureSpec) -> Result<Integral> {
    let rx2 = dot(&x[..n], &x[..n]);
    let lead = (r * r - rx2).powf(s);
    let rule = ball_rule(n, spec);
    let tol = spec.tol();
    let mut parts = Vec::with_capacity(rule.nodes.len());
    let mut total = Integral::zero();
    for (dir, w) in &rule.nodes {
        let at_sigma = |sigma: f64| -> f64 {
            let rho = r * (1.0 + sigma).sqrt();
            let mut y = [0.0; 3];
            for i in 0..n {
                y[i] = rho * dir[i];
            }
            let h = (ext.eval)(&y);
            if h == 0.0 {
                return 0.0;
            }
            // dρ = r dσ / (2 sqrt(1+σ)), (ρ²-r²)^{-s} = r^{-2s} σ^{-s}
            h * rho.powi(n as i32 - 1) * dist(&y[..n], &x[..n]).powi(-(n as i32)) * r / (2.0 * (1.0 + sigma).sqrt())
                * r.powf(-2.0 * s)
        };
        let to_sigma = |rho: f64| (rho * rho - r * r) / (r * r);
        let kinks: Vec<f64> = (ext.kinks)(dir).into_iter().filter(|&k| k > r).map(to_sigma).collect();
        // σ in (0, 1]: σ^{-s} dσ = dτ / (1 - s)
        let p = 1.0 / (1.0 - s);
        let mut tb: Vec<f64> = kinks.iter().filter(|&&k| k < 1.0).map(|k| k.powf(1.0 - s)).collect();
        tb.push(0.0);
        tb.push(1.0);
        quad::sort_dedup(&mut tb);
        let inner = quad::integrate_with_breaks(|tau: f64| at_sigma(tau.powf(p)) / (1.0 - s), &tb, tol, spec.max_nodes);
        // σ in [1, S]
        let mut s_mid = 64.0_f64;
        if let Some(rs) = ext.support {
            s_mid = s_mid.max(to_sigma(rs) * (1.0 + 1e-12) + 1e-12);
        }
        let mut mb: Vec<f64> = kinks.iter().copied().filter(|&k| k > 1.0 && k < s_mid).collect();
        mb.push(1.0);
        mb.push(s_mid);
        quad::sort_dedup(&mut mb);
        let g_sig = |sigma: f64| at_sigma(sigma) * sigma.powf(-s);
        let mid = quad::integrate_with_breaks(g_sig, &mb, tol, spec.max_nodes);
        // σ > S: integrand ~ σ^{-1-s+γ/2}
        let tail = if ext.support.is_some() {
            Integral::zero()
        } else {
            let a = s - 0.5 * ext.growth;
            if !(a > 0.0) {
                return Err(precondition("exterior datum grows too fast for the Poisson integral"));
            }
            let outer: Vec<f64> = kinks.iter().copied().filter(|&k| k > s_mid).collect();
            quad::tail_integral(g_sig, s_mid, a, &outer, tol, spec.max_nodes)
        };
        let mut di = inner;
        di.add(mid);
        di.add(tail);
        parts.push(w * di.value);
        total.err += w * di.err;
        total.evals += di.evals;
        total.converged &= di.converged;
    }
    total.value = lead * pairwise_sum(&parts);
    total.err *= lead;
    if !total.converged && total.err > tol.abs.max(tol.rel * total.value.abs()) {
        return Err(Error::Convergence { msg: "exterior Poisson quadrature".into(), best: total.value, err_est: total.err });
    }
    Ok(total)
}

/// Radial kink locations of a field along `dir` from the origin.
fn field_kinks(field: &ScalarField) -> impl Fn(&[f64; 3]) -> Vec<f64> + Sync + '_ {
    move |dir: &[f64; 3]| field.line_breaks(&[0.0; 3][..field.dim], &dir[..field.dim]).into_iter().filter(|&t| t > 0.0).collect()
}

/// `∫ g(y) P_r(x, y) dy` over the exterior of `B_r`.
pub fn poisson_integral(g: &ScalarField, x: &[f64], r: f64, s: f64, spec: &QuadratureSpec) -> Result<f64> {
    let n = g.dim;
    check_order(s)?;
    let xp = point(&x[..n]);
    if !(norm(&xp) < r) {
        return Err(domain(format!("evaluation point must lie inside B_{r}")));
    }
    if !g.decay.in_l1s(s) {
        return Err(precondition(format!("exterior datum '{}' is not in L^1_s", g.name)));
    }
    let eval = |y: &Point| g.eval(y);
    let kinks = field_kinks(g);
    let ext = Exterior { eval: &eval, kinks: &kinks, growth: g.decay.growth(), support: g.decay.support_radius() };
    Ok(a_ns(n, s)? * exterior_integral(n, r, s, &xp, &ext, spec)?.value)
}

/// `∫ A_r(y) u(x - y) dy`.
pub fn s_mean_average(field: &ScalarField, x: &[f64], r: f64, s: f64, spec: &QuadratureSpec) -> Result<f64> {
    let n = field.dim;
    check_order(s)?;
    if !(r > 0.0) {
        return Err(domain("mean-value radius must be positive"));
    }
    if !field.decay.in_l1s(s) {
        return Err(precondition(format!("field '{}' is not in L^1_s", field.name)));
    }
    let xp = point(&x[..n]);
    let eval = |y: &Point| {
        let mut z = xp;
        for i in 0..n {
            z[i] -= y[i];
        }
        field.eval(&z)
    };
    // x - ρθ meets a break where the line from x along θ has parameter -ρ
    let kinks = |dir: &[f64; 3]| -> Vec<f64> {
        field.line_breaks(&xp[..n], &dir[..n]).into_iter().filter(|&t| t < 0.0).map(|t| -t).collect()
    };
    let support = field.decay.support_radius().map(|rs| rs + norm(&xp[..n]));
    let ext = Exterior { eval: &eval, kinks: &kinks, growth: field.decay.growth(), support };
    Ok(a_ns(n, s)? * exterior_integral(n, r, s, &[0.0; 3], &ext, spec)?.value)
}

/// `b |x|^{2s-n}`, or `-(1/π) log|x|` for `n = 1, s = 1/2`.
pub fn fundamental_solution(x: &[f64], n: usize, s: f64) -> Result<f64> {
    check_dim(n)?;
    check_order(s)?;
    let rx = norm(&x[..n]);
    if rx == 0.0 {
        return Err(Error::Singular("fundamental solution at the pole".into()));
    }
    if n as f64 > 2.0 * s {
        return Ok(b_ns(n, s)? * rx.powf(2.0 * s - n as f64));
    }
    if n == 1 && s == 0.5 {
        return Ok(-rx.ln() / std::f64::consts::PI);
    }
    Err(Error::Unsupported(format!("no fundamental solution implemented for n={n}, s={s}")))
}

/// `∫_0^w t^{a-1} (1-t)^{b-1} dt = (w^a/a) 2F1(a, 1-b; a+1; w)` for `w <= 1/2`.
fn beta_series(a: f64, b: f64, w: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0 / a;
    for k in 0..200 {
        let kf = k as f64;
        term *= (kf + 1.0 - b) * w / (kf + 1.0);
        let add = term / (a + kf + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    w.powf(a) * sum
}

/// `∫_0^R t^{s-1} (1+t)^{-n/2} dt`.
pub fn green_incomplete(big_r: f64, n: usize, s: f64) -> f64 {
    if big_r <= 0.0 {
        return 0.0;
    }
    let h = n as f64 / 2.0;
    if h > s {
        // w = t/(1+t) turns it into the incomplete beta B_w(s, n/2 - s)
        let (w, wc) = (big_r / (1.0 + big_r), 1.0 / (1.0 + big_r));
        if w <= 0.5 {
            return beta_series(s, h - s, w);
        }
        let complete = gamma(s).and_then(|a| Ok(a * gamma(h - s)? / gamma(h)?)).expect("valid order");
        return complete - beta_series(h - s, s, wc);
    }
    let tol = quad::Tol::new(1e-15, 1e-13);
    // τ = t^s on [0, min(R, 1)]
    let head_end = big_r.min(1.0).powf(s);
    let head = quad::integrate(|tau: f64| (1.0 + tau.powf(1.0 / s)).powf(-h) / s, 0.0, head_end, tol, 100_000);
    let mut total = head.value;
    if big_r > 1.0 {
        // t = e^v beyond 1
        let tail = quad::integrate(|v: f64| (s * v).exp() * (1.0 + v.exp()).powf(-h), 0.0, big_r.ln(), tol, 100_000);
        total += tail.value;
    }
    total
}

/// Green function of `B_r` with pole at `x`, evaluated at `z`.
pub fn green_function(x: &[f64], z: &[f64], r: f64, n: usize, s: f64) -> Result<f64> {
    check_dim(n)?;
    check_order(s)?;
    let (rx, rz) = (norm(&x[..n]), norm(&z[..n]));
    if !(rx < r && rz < r) {
        return Err(domain("Green function arguments must lie inside the ball"));
    }
    let d = dist(&x[..n], &z[..n]);
    if d == 0.0 {
        return Err(Error::Singular("Green function at coincident points".into()));
    }
    let num = (r * r - rx * rx) * (r * r - rz * rz);
    if n == 1 && s == 0.5 {
        let arg = (r * r - x[0] * z[0] + num.sqrt()) / (r * d);
        return Ok(arg.ln() / std::f64::consts::PI);
    }
    let big_r = num / (r * r * d * d);
    Ok(kappa_ns(n, s)? * d.powf(2.0 * s - n as f64) * green_incomplete(big_r, n, s))
}

/// Bounded part of the exterior datum check.
fn require(prob: &BallProblem, x: &[f64]) -> Result<Point> {
    prob.validate()?;
    let xp = point(&x[..prob.n]);
    if !(norm(&xp) < prob.r) {
        return Err(domain(format!("evaluation point must lie inside B_{}", prob.r)));
    }
    Ok(xp)
}

/// Poisson representation of the solution with zero source.
pub fn solve_homogeneous(prob: &BallProblem, x: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    let xp = require(prob, x)?;
    if prob.f.is_some() {
        return Err(usage("solve_homogeneous takes a problem without source"));
    }
    let g = prob.g.as_ref().expect("validated");
    poisson_integral(g, &xp, prob.r, prob.s, spec)
}

fn green_potential(f: &ScalarField, x: &Point, r: f64, s: f64, spec: &QuadratureSpec) -> Result<f64> {
    let n = f.dim;
    let rule = ball_rule(n, spec);
    let tol = spec.tol();
    let q = 1.0 / (2.0 * s);
    let mut parts = Vec::with_capacity(rule.nodes.len());
    let mut converged = true;
    let mut err = 0.0;
    for (dir, w) in &rule.nodes {
        let xd = dot(&x[..n], &dir[..n]);
        let rmax = -xd + (xd * xd + r * r - dot(&x[..n], &x[..n])).sqrt();
        // ρ = ρ_max ω^{1/(2s)} flattens the ρ^{2s-1} behaviour at the pole
        let h = |om: f64| -> f64 {
            if om <= 0.0 {
                return 0.0;
            }
            let rho = rmax * om.powf(q);
            let mut y = *x;
            for i in 0..n {
                y[i] += rho * dir[i];
            }
            if norm(&y[..n]) >= r {
                return 0.0;
            }
            let fv = f.eval(&y);
            if fv == 0.0 {
                return 0.0;
            }
            let gv = green_function(x, &y, r, n, s).unwrap_or(0.0);
            let drho = rmax * q * om.powf(q - 1.0);
            gv * fv * rho.powi(n as i32 - 1) * drho
        };
        let mut breaks: Vec<f64> = f
            .line_breaks(&x[..n], &dir[..n])
            .into_iter()
            .filter(|&t| t > 0.0 && t < rmax)
            .map(|t| (t / rmax).powf(2.0 * s))
            .collect();
        breaks.push(0.0);
        breaks.push(1.0);
        quad::sort_dedup(&mut breaks);
        let i = quad::integrate_with_breaks(h, &breaks, tol, spec.max_nodes);
        converged &= i.converged;
        err += w * i.err;
        parts.push(w * i.value);
    }
    let value = pairwise_sum(&parts);
    if !converged && err > tol.abs.max(tol.rel * value.abs()) {
        return Err(Error::Convergence { msg: "Green potential quadrature".into(), best: value, err_est: err });
    }
    Ok(value)
}

/// Green representation `∫_{B_r} G(x, y) f(y) dy` of the solution with zero
/// exterior datum.
pub fn solve_nonhomogeneous(prob: &BallProblem, x: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    let xp = require(prob, x)?;
    if prob.g.is_some() {
        return Err(usage("solve_nonhomogeneous takes a problem without exterior datum"));
    }
    let f = prob.f.as_ref().expect("validated");
    green_potential(f, &xp, prob.r, prob.s, spec)
}

/// Green part plus Poisson part.
pub fn solve_full(prob: &BallProblem, x: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    let xp = require(prob, x)?;
    let hom = match &prob.g {
        Some(g) => Some(poisson_integral(g, &xp, prob.r, prob.s, spec)?),
        None => None,
    };
    let inh = match &prob.f {
        Some(f) => Some(green_potential(f, &xp, prob.r, prob.s, spec)?),
        None => None,
    };
    Ok(match (hom, inh) {
        (Some(a), Some(b)) => a + b,
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => unreachable!("validated"),
    })
}

/// Tabulation settings for [`tabulate_solution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tabulation {
    /// Chebyshev nodes on `[-r, r]`
    pub nodes: usize,
}

impl Default for Tabulation {
    fn default() -> Self {
        Self { nodes: 48 }
    }
}

/// 1D solution of a ball problem as a field on the whole line: inside the
/// ball `(r^2 - x^2)^s S(x)` with `S` a Chebyshev interpolant of the computed
/// `u / (r^2 - x^2)^s`, outside the exterior datum (zero when absent).
///
/// The factorization is exact for smooth sources and for exterior data that
/// vanish near the sphere, where `S` is smooth up to the boundary.
pub fn tabulate_solution(prob: &BallProblem, tab: &Tabulation, spec: &QuadratureSpec) -> Result<ScalarField> {
    prob.validate()?;
    if prob.n != 1 {
        return Err(Error::Unsupported("tabulated solutions are one-dimensional".into()));
    }
    let (r, s) = (prob.r, prob.s);
    let nodes = Chebyshev::nodes(-r, r, tab.nodes);
    use rayon::prelude::*;
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&t| Ok(solve_full(prob, &[t], spec)? / (r * r - t * t).powf(s)))
        .collect::<Result<Vec<_>>>()?;
    let cheb = Chebyshev::new(-r, r, vals);
    let g = prob.g.clone();
    let outside = g.clone();
    let mut field = ScalarField::new(1, move |x| {
        let t = x[0];
        if t.abs() < r {
            (r * r - t * t).powf(s) * cheb.eval(t)
        } else {
            outside.as_ref().map_or(0.0, |g| g.eval(x))
        }
    })
    .named("ball-solution")
    .with_smoothness(Smoothness::Holder(s))
    .with_break(Surface::plane_axis(0, r))
    .with_break(Surface::plane_axis(0, -r));
    match &g {
        Some(g) => {
            field.decay = match g.decay {
                Decay::CompactSupport { radius } => Decay::CompactSupport { radius: radius.max(r) },
                d => d,
            };
            field.breaks.extend(g.breaks.iter().copied());
        }
        None => field.decay = Decay::CompactSupport { radius: r },
    }
    Ok(field)
}
