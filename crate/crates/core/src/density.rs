//! Least-squares approximation on B_1 by s-harmonic functions whose exterior
//! data are bumps supported in an annulus, and the Harnack counterexample
//! built from it. One-dimensional only.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ball::{tabulate_solution, BallProblem, Tabulation};
use crate::error::{usage, Error, Result};
use crate::field::{local_bump, ScalarField};
use crate::pointwise::QuadratureSpec;
use crate::special::check_order;
use crate::verify::{Report, Threshold, Verdict};

pub const RIDGE: f64 = 1e-10;
const MAX_CONDITION: f64 = 1e13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisOptions {
    /// elements are s-harmonic on `B_rho`, `rho >= 1`
    pub harmonic_radius: f64,
    pub tabulation: Tabulation,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self { harmonic_radius: 1.25, tabulation: Tabulation { nodes: 64 } }
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub r_outer: f64,
    pub width: f64,
    pub s: f64,
    pub harmonic_radius: f64,
    /// bump centers, one per element
    pub centers: Vec<f64>,
    pub elements: Vec<ScalarField>,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn combination(&self, coefficients: &[f64]) -> ScalarField {
        let els = self.elements.clone();
        let c = coefficients.to_vec();
        let ext = 0.5 * self.width + self.r_outer;
        let mut f = ScalarField::new(1, move |x| els.iter().zip(&c).map(|(e, c)| c * e.eval(x)).sum())
            .named("harmonic-combination")
            .with_decay(crate::field::Decay::CompactSupport { radius: ext });
        if let Some(e) = self.elements.first() {
            f.smoothness = e.smoothness;
        }
        for e in &self.elements {
            f.breaks.extend(e.breaks.iter().copied());
        }
        f
    }
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![0.5 * (a + b)],
        _ => (0..k).map(|j| a + (b - a) * j as f64 / (k - 1) as f64).collect(),
    }
}

/// Bump centers: `m/2` on each side of the ball, mirror images of each
/// other, the extra one of an odd count going to the right.
pub fn bump_centers(inner: f64, r_outer: f64, width: f64, m: usize) -> Vec<f64> {
    let (a, b) = (inner + 0.5 * width, r_outer - 0.5 * width);
    let left = m / 2;
    let mut out: Vec<f64> = linspace(a, b, left).into_iter().map(|c| -c).collect();
    out.extend(linspace(a, b, m - left));
    out
}

pub fn build_basis(r_outer: f64, m: usize, width: f64, s: f64, spec: &QuadratureSpec) -> Result<HarmonicBasis> {
    build_basis_with(r_outer, m, width, s, &BasisOptions::default(), spec)
}

pub fn build_basis_with(r_outer: f64, m: usize, width: f64, s: f64, opts: &BasisOptions, spec: &QuadratureSpec) -> Result<HarmonicBasis> {
    check_order(s)?;
    let rho = opts.harmonic_radius;
    if m == 0 {
        return Err(usage("basis needs at least one element"));
    }
    if !(width > 0.0) || !(rho >= 1.0) {
        return Err(usage("bump width must be positive and the harmonic radius at least 1"));
    }
    if !(r_outer > rho + width) {
        return Err(usage(format!("bumps of width {width} between radius {rho} and R = {r_outer} would overlap B_{rho}")));
    }
    let centers = bump_centers(rho, r_outer, width, m);
    // elements for mirrored centers are reflections of each other
    let mut distinct: Vec<f64> = centers.iter().map(|c| c.abs()).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let solved: Vec<ScalarField> = distinct
        .par_iter()
        .map(|&c| {
            let g = local_bump(1, [c, 0.0, 0.0], width);
            let prob = BallProblem::homogeneous(rho, s, g);
            tabulate_solution(&prob, &opts.tabulation, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let elements = centers
        .iter()
        .map(|&c| {
            let k = distinct.iter().position(|&d| d == c.abs()).expect("center listed");
            if c >= 0.0 {
                solved[k].clone()
            } else {
                solved[k].dilated(-1.0)
            }
        })
        .collect();
    Ok(HarmonicBasis { r_outer, width, s, harmonic_radius: rho, centers, elements })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxNorm {
    C0,
    C1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub coefficients: Vec<f64>,
    /// error in the requested norm on the fitting grid of B_1
    pub achieved_error: f64,
    /// the same norm on a four times finer grid
    pub validation_error: f64,
    /// sup-norm error on B_{1/2}
    pub error_half_ball: f64,
    /// condition number of the regularized normal equations
    pub condition_estimate: f64,
}

pub const FIT_POINTS: usize = 201;
const FD_STEP: f64 = 1e-4;

fn grid(k: usize) -> Vec<f64> {
    linspace(-1.0, 1.0, k)
}

fn deriv(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    (f(x + FD_STEP) - f(x - FD_STEP)) / (2.0 * FD_STEP)
}

fn norm_error(target: &ScalarField, fit: &ScalarField, pts: &[f64], norm: ApproxNorm) -> f64 {
    let e = |x: f64| target.eval(&[x]) - fit.eval(&[x]);
    pts.iter()
        .map(|&x| {
            let v = e(x).abs();
            match norm {
                ApproxNorm::C0 => v,
                ApproxNorm::C1 => v.max(deriv(&e, x).abs()),
            }
        })
        .fold(0.0, f64::max)
}

/// Ridge-regularized least squares: minimizes `|Ac - b|² + λ |c|²`.
pub fn ridge_solve(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Result<(DVector<f64>, f64)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(Error::Conditioning { msg: "design matrix is zero or not finite".into(), condition: f64::INFINITY });
    }
    let reg = lambda;
    let cond = (smax * smax + reg) / (smin * smin + reg);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v requested");
    let utb = u.transpose() * b;
    let mut w = DVector::zeros(svd.singular_values.len());
    for (i, &sig) in svd.singular_values.iter().enumerate() {
        w[i] = sig / (sig * sig + reg) * utb[i];
    }
    let c = vt.transpose() * w;
    if c.iter().any(|v| !v.is_finite()) || !(cond < MAX_CONDITION) {
        return Err(Error::Conditioning { msg: "regularized solve produced non-finite coefficients".into(), condition: cond });
    }
    Ok((c, cond))
}

pub fn approximate(target: &ScalarField, basis: &HarmonicBasis, norm: ApproxNorm) -> Result<ApproxResult> {
    if target.dim != 1 {
        return Err(Error::Unsupported("the density demo is one-dimensional".into()));
    }
    let pts = grid(FIT_POINTS);
    let m = basis.len();
    let rows = match norm {
        ApproxNorm::C0 => pts.len(),
        ApproxNorm::C1 => 2 * pts.len(),
    };
    let mut a = DMatrix::zeros(rows, m);
    let mut b = DVector::zeros(rows);
    for (i, &x) in pts.iter().enumerate() {
        let t = target.eval(&[x]);
        if !t.is_finite() {
            return Err(usage(format!("target is not finite at {x}")));
        }
        b[i] = t;
        if norm == ApproxNorm::C1 {
            b[pts.len() + i] = deriv(&|y| target.eval(&[y]), x);
        }
    }
    for (j, e) in basis.elements.iter().enumerate() {
        for (i, &x) in pts.iter().enumerate() {
            a[(i, j)] = e.eval(&[x]);
            if norm == ApproxNorm::C1 {
                a[(pts.len() + i, j)] = deriv(&|y| e.eval(&[y]), x);
            }
        }
    }
    let (c, cond) = ridge_solve(&a, &b, RIDGE)?;
    let coefficients: Vec<f64> = c.iter().copied().collect();
    let fit = basis.combination(&coefficients);
    let achieved_error = norm_error(target, &fit, &pts, norm);
    let validation_error = norm_error(target, &fit, &grid(4 * (FIT_POINTS - 1) + 1), norm);
    let half: Vec<f64> = linspace(-0.5, 0.5, 2 * (FIT_POINTS - 1) + 1);
    let error_half_ball = norm_error(target, &fit, &half, ApproxNorm::C0);
    Ok(ApproxResult { coefficients, achieved_error, validation_error, error_half_ball, condition_estimate: cond })
}

/// Settings of the Harnack counterexample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnackDemo {
    pub r_outer: f64,
    pub width: f64,
    /// basis sizes tried in turn until the target error is reached
    pub sizes: [usize; 4],
    pub basis: BasisOptions,
}

impl Default for HarnackDemo {
    fn default() -> Self {
        Self { r_outer: 3.0, width: 0.5, sizes: [20, 40, 60, 80], basis: BasisOptions::default() }
    }
}

/// Fits `v_ε ≈ |x|²` on B_1 within `ε`, sets `u_ε = v_ε - min_{B_1} v_ε + ε²`
/// and reports sup and inf of `u_ε` over B_{1/2}. Without the `ε²` lift the
/// infimum is exactly zero and the ratio is infinite.
pub fn harnack_failure_demo(epsilon: f64, s: f64, demo: &HarnackDemo, spec: &QuadratureSpec) -> Result<Report> {
    check_order(s)?;
    if !(epsilon > 0.0 && epsilon < 0.125) {
        return Err(usage("epsilon must lie in (0, 1/8)"));
    }
    let w = ScalarField::new(1, |x| x[0] * x[0]).named("x^2");
    let inputs = json!({ "epsilon": epsilon, "s": s, "demo": demo });
    let mut fitted = None;
    for &m in &demo.sizes {
        let basis = build_basis_with(demo.r_outer, m, demo.width, s, &demo.basis, spec)?;
        let res = approximate(&w, &basis, ApproxNorm::C0)?;
        let ok = res.validation_error.max(res.achieved_error) <= epsilon;
        fitted = Some((m, basis, res));
        if ok {
            break;
        }
    }
    let (m, basis, res) = fitted.expect("at least one basis size");
    let err = res.validation_error.max(res.achieved_error);
    let v = basis.combination(&res.coefficients);
    let pts = grid(4 * (FIT_POINTS - 1) + 1);
    let vals: Vec<f64> = pts.iter().map(|&x| v.eval(&[x])).collect();
    let (imin, vmin) = vals.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &y)| if y < acc.1 { (i, y) } else { acc });
    let lift = epsilon * epsilon;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut u_min_b1 = f64::INFINITY;
    for (&x, &y) in pts.iter().zip(&vals) {
        let u = y - vmin + lift;
        u_min_b1 = u_min_b1.min(u);
        if x.abs() <= 0.5 {
            lo = lo.min(u);
            hi = hi.max(u);
        }
    }
    let argmin = pts[imin];
    let measured = vec![
        ("basis_size".to_string(), m as f64),
        ("fit_error_b1".to_string(), err),
        ("v_at_0".to_string(), v.eval(&[0.0])),
        ("argmin_v".to_string(), argmin),
        ("u_min_b1".to_string(), u_min_b1),
        ("inf_u_half".to_string(), lo),
        ("sup_u_half".to_string(), hi),
        ("ratio".to_string(), hi / lo),
    ];
    // an unreached target error is reported, not failed
    let verdict = if err > epsilon {
        Verdict::Reported
    } else if argmin.abs() <= 0.25 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Report {
        check_name: "harnack_failure_eps".into(),
        inputs,
        measured,
        threshold: Threshold::Value(epsilon),
        verdict,
    })
}
