//! Direct evaluation of `(-Δ)^s u(x)` from the symmetric second-difference
//! integral
//!
//! ```text
//! (c_{n,s}/2) ∫ (2u(x) - u(x+y) - u(x-y)) / |y|^{n+2s} dy
//! ```
//!
//! in polar coordinates. The integrand is even in `y`, so only a half sphere of
//! directions is visited. For each direction the radial integral is split into
//! a Taylor core `[0, δ]`, an adaptive middle range and a tail.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, Error, Result};
use crate::field::{norm, Point, ScalarField};
use crate::quad::{self, composite_gl, pairwise_sum, SphereRule, Tol};
use crate::special::c_ns;

/// Orders closer than this to 0 or 1 are refused.
pub const S_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// closed form for the `u(x)` part; the rest bounded from decay metadata
    /// when it is a power law, integrated otherwise
    AnalyticPower,
    /// `ρ = R w^{-1/a}` compactification of the whole tail
    NumericCompactified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub delta: f64,
    pub r_mid: f64,
    pub tol_rel: f64,
    pub tol_abs: f64,
    pub max_nodes: usize,
    pub tail_mode: TailMode,
    /// angular resolution parameter (directions on a half circle for n = 2,
    /// Gauss points in the polar angle for n = 3)
    pub angular_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            delta: 0.1,
            r_mid: 8.0,
            tol_rel: 1e-10,
            tol_abs: 1e-11,
            max_nodes: 5_000_000,
            tail_mode: TailMode::NumericCompactified,
            angular_nodes: 64,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < self.r_mid) {
            return Err(domain(format!("need 0 < delta < r_mid (delta={}, r_mid={})", self.delta, self.r_mid)));
        }
        if !(self.tol_rel > 0.0 && self.tol_abs > 0.0) {
            return Err(domain("tolerances must be positive"));
        }
        if self.max_nodes < 100 {
            return Err(domain("max_nodes must be at least 100"));
        }
        if self.angular_nodes == 0 {
            return Err(domain("angular_nodes must be positive"));
        }
        Ok(())
    }

    pub fn tol(&self) -> Tol {
        Tol::new(self.tol_abs, self.tol_rel)
    }

    pub fn half_rule(&self, n: usize) -> SphereRule {
        SphereRule::half(n, self.angular_nodes)
    }

    pub fn full_rule(&self, n: usize) -> SphereRule {
        SphereRule::full(n, self.angular_nodes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpValue {
    pub value: f64,
    pub err_est: f64,
    pub nodes_used: usize,
}

pub(crate) fn check_guarded_order(s: f64) -> Result<()> {
    if !(s >= S_GUARD && s <= 1.0 - S_GUARD) {
        return Err(domain(format!("order s={s} outside the supported range [{S_GUARD}, {}]", 1.0 - S_GUARD)));
    }
    Ok(())
}

/// Preconditions shared by every evaluation at `x`.
pub(crate) fn check_preconditions(field: &ScalarField, x: &[f64], s: f64) -> Result<()> {
    if !field.decay.in_l1s(s) {
        return Err(precondition(format!("field '{}' is not in L^1_s for s={s}", field.name)));
    }
    let on_break = field.smooth_radius(x) <= 1e-12 * (1.0 + norm(&x[..field.dim]));
    if on_break && field.smoothness.order() <= 2.0 * s {
        return Err(precondition(format!(
            "field '{}' is only of order {} at x, need more than 2s={}",
            field.name,
            field.smoothness.order(),
            2.0 * s
        )));
    }
    Ok(())
}

struct Radial<'a> {
    field: &'a ScalarField,
    x: Point,
    dir: [f64; 3],
    ux: f64,
}

impl Radial<'_> {
    fn at(&self, rho: f64, sign: f64) -> f64 {
        let mut p = self.x;
        for i in 0..self.field.dim {
            p[i] += sign * rho * self.dir[i];
        }
        self.field.eval(&p)
    }

    fn second_difference(&self, rho: f64) -> f64 {
        2.0 * self.ux - self.at(rho, 1.0) - self.at(rho, -1.0)
    }
}

/// `∫_0^∞ (2u(x) - u(x+ρθ) - u(x-ρθ)) ρ^{-1-2s} dρ` for one direction.
fn radial_integral(
    field: &ScalarField,
    x: &Point,
    dir: &[f64; 3],
    ux: f64,
    s: f64,
    spec: &QuadratureSpec,
    core_target: f64,
    budget: usize,
) -> quad::Integral {
    let r = Radial { field, x: *x, dir: *dir, ux };
    let two_s = 2.0 * s;
    let tol = spec.tol();
    let mut kinks: Vec<f64> = field
        .line_breaks(&x[..field.dim], &dir[..field.dim])
        .into_iter()
        .map(f64::abs)
        .collect();
    quad::sort_dedup(&mut kinks);
    let scale = 1.0 + norm(&x[..field.dim]);
    let on_kink = kinks.first().is_some_and(|&k| k <= 1e-12 * scale);
    kinks.retain(|&k| k > 1e-12 * scale);
    let nearest = kinks.first().copied().unwrap_or(f64::INFINITY);

    let mut total = quad::Integral::zero();

    // core [0, δ]
    let delta = if on_kink {
        0.0
    } else {
        let mut delta = spec.delta.min(nearest / 4.0);
        let floor = 1e-3 * delta.min(1.0);
        // (delta, value, err) of the best level; halving stops once roundoff
        // in the second difference keeps the correction from shrinking
        let mut best: Option<(f64, f64, f64)> = None;
        loop {
            let g1 = r.second_difference(delta) / (delta * delta);
            let h = 0.5 * delta;
            let g2 = r.second_difference(h) / (h * h);
            total.evals += 4;
            let a = (4.0 * g2 - g1) / 3.0;
            let b = (g1 - g2) / (0.75 * delta * delta);
            let lead = a * delta.powf(2.0 - two_s) / (2.0 - two_s);
            let corr = b * delta.powf(4.0 - two_s) / (4.0 - two_s);
            if best.is_some_and(|(_, _, e)| corr.abs() >= e) {
                break;
            }
            best = Some((delta, lead + corr, corr.abs()));
            if corr.abs() <= core_target || delta <= floor {
                break;
            }
            delta *= 0.5;
        }
        let (delta, value, err) = best.expect("at least one level");
        total.value = value;
        total.err = err;
        delta
    };

    // middle [δ, R]
    let support = field.decay.support_radius();
    let mut r_mid = spec.r_mid.max(2.0 * delta);
    if let Some(rs) = support {
        r_mid = r_mid.max(norm(&x[..field.dim]) + rs + 1e-9);
    }
    let mut breaks = vec![delta, r_mid];
    breaks.extend(kinks.iter().copied().filter(|&k| k > delta && k < r_mid));
    quad::sort_dedup(&mut breaks);
    let weight = |rho: f64| rho.powf(-1.0 - two_s);
    let mid = quad::integrate_with_breaks(
        |rho| r.second_difference(rho) * weight(rho),
        &breaks,
        tol,
        budget.saturating_sub(total.evals),
    );
    total.add(mid);

    // tail [R, ∞): 2u(x) R^{-2s}/(2s) minus the integral of u(x±ρθ)
    total.add(quad::Integral::exact(2.0 * ux * r_mid.powf(-two_s) / two_s));
    let outer_kinks: Vec<f64> = kinks.iter().copied().filter(|&k| k > r_mid).collect();
    let far = match (support, spec.tail_mode, field.decay) {
        (Some(_), _, _) => quad::Integral::zero(),
        (None, TailMode::AnalyticPower, crate::field::Decay::PowerDecay { exponent, constant }) if exponent > 0.0 => {
            // |u(x±ρθ)| <= M (1 + ρ - |x|)^{-p}; bound the remainder
            let d = (r_mid - norm(&x[..field.dim])).max(1.0);
            let bound = 2.0 * constant * d.powf(-exponent) * r_mid.powf(-two_s) / two_s;
            quad::Integral { value: 0.0, err: bound, evals: 0, converged: true }
        }
        _ => {
            let a = two_s - field.decay.growth();
            quad::tail_integral(
                |rho| (r.at(rho, 1.0) + r.at(rho, -1.0)) * weight(rho),
                r_mid,
                a,
                &outer_kinks,
                tol,
                budget.saturating_sub(total.evals),
            )
            .scaled(-1.0)
        }
    };
    total.add(far);
    total
}

/// `(-Δ)^s u(x)`.
pub fn frac_lap_point(field: &ScalarField, x: &[f64], s: f64, spec: &QuadratureSpec) -> Result<OpValue> {
    spec.validate()?;
    check_guarded_order(s)?;
    let n = field.dim;
    if x.len() < n {
        return Err(domain(format!("point has {} coordinates, field needs {n}", x.len())));
    }
    check_preconditions(field, x, s)?;
    let c = c_ns(n, s)?;
    let xp = crate::field::point(&x[..n]);
    let ux = field.eval(&xp);
    let rule = spec.half_rule(n);
    let w_total = rule.total_weight();
    let core_target = spec.tol_abs / (10.0 * c * w_total);

    let mut values = Vec::with_capacity(rule.nodes.len());
    let mut err = 0.0;
    let mut evals = 0usize;
    let mut converged = true;
    for (dir, w) in &rule.nodes {
        let budget = spec.max_nodes.saturating_sub(evals);
        let i = radial_integral(field, &xp, dir, ux, s, spec, core_target, budget);
        values.push(w * i.value);
        err += w * i.err;
        evals += i.evals;
        converged &= i.converged;
    }
    let value = c * pairwise_sum(&values);
    let err_est = c * err;
    if !converged {
        let target = spec.tol_abs.max(spec.tol_rel * value.abs());
        // a direction that missed its own target is fatal only when the
        // combined estimate is also off target
        if err_est > target || evals >= spec.max_nodes {
            return Err(Error::Convergence {
                msg: format!("pointwise quadrature at x={:?} (s={s}) used {evals} nodes", &x[..n]),
                best: value,
                err_est,
            });
        }
    }
    Ok(OpValue { value, err_est, nodes_used: evals.min(spec.max_nodes) })
}

/// Evaluates at many points in parallel; each result is independent of the others.
pub fn frac_lap_grid(field: &ScalarField, points: &[Point], s: f64, spec: &QuadratureSpec) -> Result<Vec<OpValue>> {
    points.par_iter().map(|p| frac_lap_point(field, p, s, spec)).collect()
}

/// Uniform sampling used to turn `(-Δ)^s u` back into a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleGrid {
    pub half_width: f64,
    pub points: usize,
}

impl Default for ResampleGrid {
    fn default() -> Self {
        Self { half_width: 30.0, points: 1201 }
    }
}

/// `(-Δ)^s u` of a 1D field as a field: a cubic spline through grid values on
/// `[-L, L]`, continued by `A_± |x|^{-1-2s}` matched at `±L`, the decay every
/// image of a rapidly decaying field has.
pub fn frac_lap_field_1d(field: &ScalarField, s: f64, grid: &ResampleGrid, spec: &QuadratureSpec) -> Result<ScalarField> {
    if field.dim != 1 {
        return Err(Error::Unsupported("resampled images are one-dimensional".into()));
    }
    if !matches!(field.decay, crate::field::Decay::Rapid | crate::field::Decay::CompactSupport { .. }) {
        return Err(precondition("resampling needs a rapidly decaying field"));
    }
    if grid.points < 4 || !(grid.half_width > 0.0) {
        return Err(domain("resample grid needs at least 4 points and a positive width"));
    }
    let l = grid.half_width;
    let xs: Vec<f64> = (0..grid.points).map(|i| -l + 2.0 * l * i as f64 / (grid.points - 1) as f64).collect();
    let pts: Vec<Point> = xs.iter().map(|&x| [x, 0.0, 0.0]).collect();
    let ys: Vec<f64> = frac_lap_grid(field, &pts, s, spec)?.into_iter().map(|v| v.value).collect();
    let p = 1.0 + 2.0 * s;
    let (a_lo, a_hi) = (ys[0] * l.powf(p), ys[ys.len() - 1] * l.powf(p));
    let spline = crate::interp::CubicSpline::new(xs, ys);
    let bound = a_lo.abs().max(a_hi.abs()).max(1.0);
    Ok(ScalarField::new(1, move |x| {
        let t = x[0];
        if t < -l {
            a_lo * (-t).powf(-p)
        } else if t > l {
            a_hi * t.powf(-p)
        } else {
            spline.eval(t)
        }
    })
    .named(format!("(-Δ)^{s} {}", field.name))
    .with_smoothness(crate::field::Smoothness::C2)
    .with_decay(crate::field::Decay::PowerDecay { exponent: p, constant: bound })
    .with_break(crate::field::Surface::plane_axis(0, l))
    .with_break(crate::field::Surface::plane_axis(0, -l)))
}

/// Truncation box and tensor Gauss rule for [`pairing_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingGrid {
    pub half_width: f64,
    pub panels: usize,
    pub order: usize,
}

impl Default for PairingGrid {
    fn default() -> Self {
        Self { half_width: 6.0, panels: 24, order: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pairing {
    pub lhs: f64,
    pub rhs: f64,
}

/// `∫ (-Δ)^s u · v` and `∫ u · (-Δ)^s v` over the truncation box.
pub fn pairing_check(u: &ScalarField, v: &ScalarField, s: f64, spec: &QuadratureSpec, grid: &PairingGrid) -> Result<Pairing> {
    if u.dim != v.dim {
        return Err(domain("fields of different dimension"));
    }
    let n = u.dim;
    if n > 2 {
        return Err(Error::Unsupported("pairing_check is implemented for n <= 2".into()));
    }
    let rule1 = composite_gl(-grid.half_width, grid.half_width, grid.panels, grid.order);
    let mut nodes: Vec<(Point, f64)> = Vec::new();
    if n == 1 {
        for &(t, w) in &rule1 {
            nodes.push(([t, 0.0, 0.0], w));
        }
    } else {
        for &(t1, w1) in &rule1 {
            for &(t2, w2) in &rule1 {
                nodes.push(([t1, t2, 0.0], w1 * w2));
            }
        }
    }
    let side = |a: &ScalarField, b: &ScalarField| -> Result<f64> {
        let terms: Vec<f64> = nodes
            .par_iter()
            .map(|(p, w)| {
                let bv = b.eval(p);
                if bv == 0.0 {
                    return Ok(0.0);
                }
                Ok(w * bv * frac_lap_point(a, p, s, spec)?.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(pairwise_sum(&terms))
    };
    Ok(Pairing { lhs: side(u, v)?, rhs: side(v, u)? })
}
