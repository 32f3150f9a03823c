//! Scalar fields on R^n together with the regularity and decay metadata the
//! quadrature planners rely on.
//!
//! Metadata is declared, not inferred. A field is C^∞ away from its `breaks`
//! surfaces; `smoothness` is the worst regularity it has on them. `decay`
//! bounds the growth at infinity and decides membership in L^1_s.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::quad::{self, SphereRule, Tol};
use crate::special::check_order;

/// Points are stored in a fixed array; only the first `dim` entries matter.
pub type Point = [f64; 3];

pub fn point(coords: &[f64]) -> Point {
    let mut p = [0.0; 3];
    p[..coords.len()].copy_from_slice(coords);
    p
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    Holder(f64),
    C1Holder(f64),
    C2,
    Cinf,
}

impl Smoothness {
    /// Total regularity order: `C^{k,α}` has order `k + α`.
    pub fn order(&self) -> f64 {
        match *self {
            Smoothness::C0 => 0.0,
            Smoothness::Holder(a) => a,
            Smoothness::C1Holder(a) => 1.0 + a,
            Smoothness::C2 => 2.0,
            Smoothness::Cinf => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Decay {
    CompactSupport { radius: f64 },
    /// `|u(x)| <= constant * (1 + |x|)^{-exponent}`; a negative exponent is growth.
    PowerDecay { exponent: f64, constant: f64 },
    /// faster than any power
    Rapid,
    Bounded { bound: f64 },
}

impl Decay {
    /// Exponent `γ >= 0` with `|u(x)| = O(|x|^γ)` at infinity.
    pub fn growth(&self) -> f64 {
        match *self {
            Decay::PowerDecay { exponent, .. } => (-exponent).max(0.0),
            _ => 0.0,
        }
    }

    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            Decay::CompactSupport { radius } => Some(radius),
            _ => None,
        }
    }

    /// Whether the decay alone implies `u ∈ L^1_s`.
    pub fn in_l1s(&self, s: f64) -> bool {
        match *self {
            Decay::PowerDecay { exponent, .. } => exponent + 2.0 * s > 0.0,
            _ => true,
        }
    }
}

/// Surface across which a field may lose smoothness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Surface {
    /// `{x : normal · x = offset}` with a unit normal
    Plane { normal: Point, offset: f64 },
    Sphere { center: Point, radius: f64 },
}

impl Surface {
    pub fn plane_axis(axis: usize, offset: f64) -> Self {
        let mut normal = [0.0; 3];
        normal[axis] = 1.0;
        Surface::Plane { normal, offset }
    }

    pub fn sphere(center: Point, radius: f64) -> Self {
        Surface::Sphere { center, radius }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Surface::Plane { normal, offset } => (dot(&normal[..x.len()], x) - offset).abs(),
            Surface::Sphere { center, radius } => (dist(&center[..x.len()], x) - radius).abs(),
        }
    }

    /// Parameters `t` (any sign) where `origin + t·dir` meets the surface;
    /// `dir` must be a unit vector.
    pub fn crossings(&self, origin: &[f64], dir: &[f64]) -> Vec<f64> {
        let n = origin.len();
        match self {
            Surface::Plane { normal, offset } => {
                let nd = dot(&normal[..n], dir);
                if nd.abs() < 1e-300 {
                    return vec![];
                }
                vec![(offset - dot(&normal[..n], origin)) / nd]
            }
            Surface::Sphere { center, radius } => {
                let mut oc = [0.0; 3];
                for i in 0..n {
                    oc[i] = origin[i] - center[i];
                }
                let b = dot(&oc[..n], dir);
                let c = dot(&oc[..n], &oc[..n]) - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return vec![];
                }
                let sq = disc.sqrt();
                vec![-b - sq, -b + sq]
            }
        }
    }

    fn transformed(&self, map: &dyn Fn(&Point) -> Point, lin: &dyn Fn(&Point) -> Point, scale: f64) -> Surface {
        match *self {
            Surface::Sphere { center, radius } => Surface::Sphere { center: map(&center), radius: radius * scale },
            Surface::Plane { normal, offset } => {
                // point on the plane mapped, normal mapped linearly
                let mut p = [0.0; 3];
                for i in 0..3 {
                    p[i] = normal[i] * offset;
                }
                let q = map(&p);
                let mut nn = lin(&normal);
                let l = norm(&nn);
                for v in nn.iter_mut() {
                    *v /= l;
                }
                Surface::Plane { normal: nn, offset: dot(&nn, &q) }
            }
        }
    }
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A real-valued function on R^n with declared regularity and decay.
#[derive(Clone)]
pub struct ScalarField {
    pub dim: usize,
    pub name: String,
    eval: Arc<EvalFn>,
    grad: Option<Arc<GradFn>>,
    pub smoothness: Smoothness,
    pub decay: Decay,
    pub breaks: Vec<Surface>,
    /// known `(inf, sup)` over R^n, when available
    pub range: Option<(f64, f64)>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .field("smoothness", &self.smoothness)
            .field("decay", &self.decay)
            .field("breaks", &self.breaks)
            .field("range", &self.range)
            .finish()
    }
}

impl ScalarField {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        assert!((1..=3).contains(&dim), "fields live in R^1..R^3");
        Self {
            dim,
            name: "anonymous".into(),
            eval: Arc::new(f),
            grad: None,
            smoothness: Smoothness::Cinf,
            decay: Decay::Rapid,
            breaks: vec![],
            range: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_grad(mut self, g: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(g));
        self
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    pub fn with_decay(mut self, d: Decay) -> Self {
        self.decay = d;
        self
    }

    pub fn with_break(mut self, s: Surface) -> Self {
        self.breaks.push(s);
        self
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(&x[..self.dim])
    }

    pub fn has_grad(&self) -> bool {
        self.grad.is_some()
    }

    pub fn grad(&self, x: &[f64]) -> Option<Point> {
        self.grad.as_ref().map(|g| {
            let mut out = [0.0; 3];
            g(&x[..self.dim], &mut out[..self.dim]);
            out
        })
    }

    /// Distance from `x` to the nearest declared break surface.
    pub fn smooth_radius(&self, x: &[f64]) -> f64 {
        self.breaks
            .iter()
            .map(|b| b.distance(&x[..self.dim]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Parameters along `origin + t·dir` where the field meets a break or the
    /// edge of its support.
    pub fn line_breaks(&self, origin: &[f64], dir: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = Vec::new();
        for b in &self.breaks {
            out.extend(b.crossings(&origin[..n], &dir[..n]));
        }
        if let Some(r) = self.decay.support_radius() {
            out.extend(Surface::sphere([0.0; 3], r).crossings(&origin[..n], &dir[..n]));
        }
        out
    }

    /// `u_λ(x) = u(λx)`.
    pub fn dilated(&self, lambda: f64) -> ScalarField {
        let inner = self.clone();
        let n = self.dim;
        let mut out = ScalarField::new(n, move |x| {
            let mut y = [0.0; 3];
            for i in 0..n {
                y[i] = lambda * x[i];
            }
            inner.eval(&y)
        });
        out.name = format!("{}(λ={lambda})", self.name);
        out.smoothness = self.smoothness;
        out.decay = match self.decay {
            Decay::CompactSupport { radius } => Decay::CompactSupport { radius: radius / lambda.abs() },
            d => d,
        };
        out.range = self.range;
        let inv = 1.0 / lambda;
        out.breaks = self
            .breaks
            .iter()
            .map(|b| b.transformed(&|p: &Point| [p[0] * inv, p[1] * inv, p[2] * inv], &|p: &Point| *p, inv.abs()))
            .collect();
        out
    }

    /// `x ↦ u(x - shift)`.
    pub fn translated(&self, shift: &[f64]) -> ScalarField {
        let inner = self.clone();
        let n = self.dim;
        let sh = point(&shift[..n]);
        let mut out = ScalarField::new(n, move |x| {
            let mut y = [0.0; 3];
            for i in 0..n {
                y[i] = x[i] - sh[i];
            }
            inner.eval(&y)
        });
        out.name = format!("{}(shifted)", self.name);
        out.smoothness = self.smoothness;
        out.range = self.range;
        out.decay = match self.decay {
            Decay::CompactSupport { radius } => Decay::CompactSupport { radius: radius + norm(&sh) },
            d => d,
        };
        out.breaks = self
            .breaks
            .iter()
            .map(|b| b.transformed(&|p: &Point| [p[0] + sh[0], p[1] + sh[1], p[2] + sh[2]], &|p: &Point| *p, 1.0))
            .collect();
        out
    }

    /// `x ↦ u(Qᵀx)` for an orthogonal `Q` (row-major 3×3, upper-left block used).
    pub fn rotated(&self, q: [[f64; 3]; 3]) -> ScalarField {
        let inner = self.clone();
        let n = self.dim;
        let mut out = ScalarField::new(n, move |x| {
            let mut y = [0.0; 3];
            for i in 0..n {
                for j in 0..n {
                    y[i] += q[j][i] * x[j];
                }
            }
            inner.eval(&y)
        });
        out.name = format!("{}(rotated)", self.name);
        out.smoothness = self.smoothness;
        out.decay = self.decay;
        out.range = self.range;
        let apply = move |p: &Point| {
            let mut y = [0.0; 3];
            for i in 0..n {
                for j in 0..n {
                    y[i] += q[i][j] * p[j];
                }
            }
            y
        };
        out.breaks = self.breaks.iter().map(|b| b.transformed(&apply, &apply, 1.0)).collect();
        out
    }

    /// `α·u + β·v`; metadata is the weaker of the two.
    pub fn combine(alpha: f64, u: &ScalarField, beta: f64, v: &ScalarField) -> ScalarField {
        assert_eq!(u.dim, v.dim);
        let (uu, vv) = (u.clone(), v.clone());
        let mut out = ScalarField::new(u.dim, move |x| alpha * uu.eval(x) + beta * vv.eval(x));
        out.name = format!("{alpha}*{}+{beta}*{}", u.name, v.name);
        out.smoothness = if u.smoothness.order() <= v.smoothness.order() { u.smoothness } else { v.smoothness };
        out.decay = weaker_decay(u.decay, v.decay, alpha, beta);
        out.breaks = u.breaks.iter().chain(v.breaks.iter()).copied().collect();
        out
    }

    pub fn scaled_by(&self, alpha: f64) -> ScalarField {
        let zero = ScalarField::new(self.dim, |_| 0.0).with_decay(Decay::CompactSupport { radius: 0.0 });
        let mut out = ScalarField::combine(alpha, self, 0.0, &zero);
        out.decay = self.decay;
        out.breaks = self.breaks.clone();
        out.smoothness = self.smoothness;
        out.range = self.range.map(|(lo, hi)| {
            let (a, b) = (alpha * lo, alpha * hi);
            (a.min(b), a.max(b))
        });
        out
    }
}

fn weaker_decay(a: Decay, b: Decay, alpha: f64, beta: f64) -> Decay {
    use Decay::*;
    let grow = |d: Decay| match d {
        CompactSupport { .. } => (3, f64::INFINITY, 0.0),
        Rapid => (2, f64::INFINITY, 0.0),
        PowerDecay { exponent, constant } => (1, exponent, constant),
        Bounded { bound } => (0, 0.0, bound),
    };
    match (a, b) {
        (CompactSupport { radius: r1 }, CompactSupport { radius: r2 }) => CompactSupport { radius: r1.max(r2) },
        _ => {
            let (ka, ea, ca) = grow(a);
            let (kb, eb, cb) = grow(b);
            if ka == 0 || kb == 0 {
                let (ba, bb) = (if ka == 0 { ca } else { f64::INFINITY }, if kb == 0 { cb } else { f64::INFINITY });
                if ea.min(eb) >= 0.0 {
                    return Bounded { bound: (alpha.abs() * ba.min(f64::MAX) + beta.abs() * bb.min(f64::MAX)).min(f64::MAX) };
                }
            }
            if ka >= 2 && kb >= 2 {
                return Rapid;
            }
            let e = ea.min(eb);
            PowerDecay { exponent: e, constant: alpha.abs() * ca.max(1.0) + beta.abs() * cb.max(1.0) }
        }
    }
}

// ---------------------------------------------------------------------------
// catalog

/// Smooth monotone transition: 1 for t <= 0, 0 for t >= 1, C^∞ in between.
pub fn smooth_step_down(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / (1.0 - t)).exp();
        let b = (-1.0 / t).exp();
        a / (a + b)
    }
}

/// Radial cutoff equal to 1 on `B_inner` and 0 outside `B_outer`.
pub fn cutoff(r: f64, inner: f64, outer: f64) -> f64 {
    smooth_step_down((r - inner) / (outer - inner))
}

#[derive(Debug, Clone)]
pub struct FieldCatalogEntry {
    pub name: String,
    pub field: ScalarField,
    pub notes: String,
}

pub fn constant(n: usize, c: f64) -> ScalarField {
    ScalarField::new(n, move |_| c)
        .named("constant")
        .with_grad(|_, g| g.iter_mut().for_each(|v| *v = 0.0))
        .with_decay(Decay::Bounded { bound: c.abs() })
        .with_range(c, c)
}

/// `exp(-|x|^2)`.
pub fn gaussian(n: usize) -> ScalarField {
    ScalarField::new(n, |x| (-dot(x, x)).exp())
        .named("gaussian")
        .with_grad(|x, g| {
            let e = (-dot(x, x)).exp();
            for i in 0..x.len() {
                g[i] = -2.0 * x[i] * e;
            }
        })
        .with_decay(Decay::Rapid)
        .with_range(0.0, 1.0)
}

/// `amp * exp(-|x - center|^2 / width^2)`.
pub fn shifted_gaussian(n: usize, center: Point, width: f64, amp: f64) -> ScalarField {
    ScalarField::new(n, move |x| {
        let mut r2 = 0.0;
        for i in 0..x.len() {
            r2 += (x[i] - center[i]) * (x[i] - center[i]);
        }
        amp * (-r2 / (width * width)).exp()
    })
    .named("shifted-gaussian")
    .with_grad(move |x, g| {
        let mut r2 = 0.0;
        for i in 0..x.len() {
            r2 += (x[i] - center[i]) * (x[i] - center[i]);
        }
        let e = amp * (-r2 / (width * width)).exp();
        for i in 0..x.len() {
            g[i] = -2.0 * (x[i] - center[i]) / (width * width) * e;
        }
    })
    .with_decay(Decay::Rapid)
    .with_range(amp.min(0.0), amp.max(0.0))
}

/// Smooth bump: 1 on `B_1`, 0 outside `B_2`.
pub fn bump(n: usize) -> ScalarField {
    ScalarField::new(n, |x| cutoff(norm(x), 1.0, 2.0))
        .named("bump")
        .with_decay(Decay::CompactSupport { radius: 2.0 })
        .with_break(Surface::sphere([0.0; 3], 1.0))
        .with_break(Surface::sphere([0.0; 3], 2.0))
        .with_range(0.0, 1.0)
}

/// Radial bump of diameter `width` centered at `center`: 1 at the center,
/// 0 outside `B_{width/2}(center)`.
pub fn local_bump(n: usize, center: Point, width: f64) -> ScalarField {
    let h = 0.5 * width;
    ScalarField::new(n, move |x| {
        let r = dist(&center[..x.len()], x) / h;
        if r >= 1.0 {
            0.0
        } else {
            // exp(1 - 1/(1 - r^2)), equal to 1 at the center
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        }
    })
    .named("local-bump")
    .with_decay(Decay::CompactSupport { radius: norm(&center) + h })
    .with_break(Surface::sphere(center, h))
    .with_range(0.0, 1.0)
}

/// `x_+^s` on the line.
pub fn x_plus_pow(s: f64) -> ScalarField {
    ScalarField::new(1, move |x| if x[0] > 0.0 { x[0].powf(s) } else { 0.0 })
        .named("xplus")
        .with_smoothness(Smoothness::Holder(s))
        .with_decay(Decay::PowerDecay { exponent: -s, constant: 1.0 })
        .with_break(Surface::plane_axis(0, 0.0))
}

/// `|x|^p`.
pub fn abs_power(n: usize, p: f64) -> ScalarField {
    ScalarField::new(n, move |x| norm(x).powf(p))
        .named("abs-power")
        .with_smoothness(if p >= 1.0 { Smoothness::C1Holder((p - 1.0).min(1.0)) } else { Smoothness::Holder(p) })
        .with_decay(Decay::PowerDecay { exponent: -p, constant: 1.0 })
        .with_break(Surface::sphere([0.0; 3], 0.0))
}

/// `|x|^2` multiplied by a cutoff equal to 1 on `B_2` and 0 outside `B_3`.
pub fn windowed_quadratic(n: usize) -> ScalarField {
    ScalarField::new(n, |x| {
        let r = norm(x);
        r * r * cutoff(r, 2.0, 3.0)
    })
    .named("windowed-quadratic")
    .with_decay(Decay::CompactSupport { radius: 3.0 })
    .with_break(Surface::sphere([0.0; 3], 2.0))
    .with_break(Surface::sphere([0.0; 3], 3.0))
}

/// `cos(2π k x_1 / L)`, a single Fourier mode on the torus of side `L`.
pub fn fourier_mode(n: usize, k: f64, l: f64) -> ScalarField {
    ScalarField::new(n, move |x| (2.0 * PI * k * x[0] / l).cos())
        .named("fourier-mode")
        .with_decay(Decay::Bounded { bound: 1.0 })
        .with_range(-1.0, 1.0)
}

pub const CATALOG_NAMES: [&str; 7] =
    ["constant", "gaussian", "bump", "xplus", "windowed-quadratic", "fourier-mode", "shifted-gaussian"];

/// Catalog lookup. `s` parameterizes `xplus`; other entries ignore it.
pub fn catalog(name: &str, n: usize, s: f64) -> Result<FieldCatalogEntry> {
    if !(1..=3).contains(&n) {
        return Err(usage(format!("dimension {n} not supported (1..=3)")));
    }
    let (field, notes) = match name {
        "constant" => (constant(n, 1.0), "u ≡ 1; fractional harmonic everywhere"),
        "gaussian" => (gaussian(n), "exp(-|x|^2)"),
        "bump" => (bump(n), "smooth, ≡ 1 on B_1, supported in B_2"),
        "xplus" => {
            if n != 1 {
                return Err(usage("xplus is one-dimensional"));
            }
            check_order(s)?;
            (x_plus_pow(s), "x_+^s, s-harmonic on the positive half-line")
        }
        "windowed-quadratic" => (windowed_quadratic(n), "|x|^2 cut off outside B_3"),
        "fourier-mode" => (fourier_mode(n, 1.0, 10.0), "cos(2π x_1/10)"),
        "shifted-gaussian" => (shifted_gaussian(n, point(&[0.5, 0.25, 0.0][..n]), 1.0, 1.0), "gaussian centered at (0.5, 0.25, 0)"),
        _ => return Err(usage(format!("unknown field '{name}'; known: {}", CATALOG_NAMES.join(", ")))),
    };
    Ok(FieldCatalogEntry { name: name.to_string(), field, notes: notes.to_string() })
}

/// One-dimensional field from samples `(x_i, u_i)`: a natural cubic spline
/// on the sampled interval, zero outside it for compactly supported data and
/// the end values otherwise. Metadata is taken as declared.
pub fn sampled_1d(xs: Vec<f64>, ys: Vec<f64>, smoothness: Smoothness, decay: Decay) -> Result<ScalarField> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(usage("a sampled field needs at least two (x, value) rows"));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
        return Err(domain("sample abscissae must be finite and strictly increasing"));
    }
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let compact = decay.support_radius().is_some();
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spline = crate::interp::CubicSpline::new(xs, ys);
    let field = ScalarField::new(1, move |x| {
        let t = x[0];
        if compact && !(lo..=hi).contains(&t) {
            0.0
        } else {
            spline.eval(t)
        }
    })
    .named("sampled")
    .with_smoothness(smoothness)
    .with_decay(decay)
    .with_break(Surface::plane_axis(0, lo))
    .with_break(Surface::plane_axis(0, hi));
    Ok(if compact { field.with_range(ymin.min(0.0), ymax.max(0.0)) } else { field })
}

// ---------------------------------------------------------------------------
// checks

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1sCheck {
    pub finite: bool,
    pub value: f64,
}

/// Approximates `∫ |u(y)| / (1 + |y|^{n+2s}) dy`.
pub fn check_l1s(field: &ScalarField, s: f64, tol: Tol, max_evals: usize) -> Result<L1sCheck> {
    check_order(s)?;
    if !field.decay.in_l1s(s) {
        return Ok(L1sCheck { finite: false, value: f64::INFINITY });
    }
    let n = field.dim;
    let p = n as f64 + 2.0 * s;
    let rule = SphereRule::full(n, if n == 1 { 1 } else { 32 });
    let a = 2.0 * s - field.decay.growth();
    let r_mid = 8.0;
    let mut total = quad::Integral::zero();
    let origin = [0.0; 3];
    for (dir, w) in &rule.nodes {
        let f = |rho: f64| {
            let y = [rho * dir[0], rho * dir[1], rho * dir[2]];
            field.eval(&y).abs() * rho.powi(n as i32 - 1) / (1.0 + rho.powf(p))
        };
        let mut breaks: Vec<f64> = field.line_breaks(&origin, dir).into_iter().filter(|t| *t > 0.0).collect();
        let mut mid = breaks.iter().copied().filter(|t| *t < r_mid).collect::<Vec<_>>();
        mid.push(0.0);
        mid.push(r_mid);
        quad::sort_dedup(&mut mid);
        let inner = quad::integrate_with_breaks(&f, &mid, tol, max_evals);
        breaks.retain(|t| *t > r_mid);
        let outer = if field.decay.support_radius().is_some_and(|r| r <= r_mid) {
            quad::Integral::zero()
        } else {
            quad::tail_integral(&f, r_mid, a, &breaks, tol, max_evals)
        };
        total.add(inner.scaled(*w));
        total.add(outer.scaled(*w));
    }
    let finite = total.converged && total.value.is_finite();
    Ok(L1sCheck { finite, value: if finite { total.value } else { f64::INFINITY } })
}

/// Axis-aligned box sampled on a uniform grid with `per_axis` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: Point,
    pub hi: Point,
    pub dim: usize,
    pub per_axis: usize,
}

impl SampleBox {
    pub fn points(&self) -> Vec<Point> {
        let m = self.per_axis.max(1);
        let step = |i: usize, k: usize| {
            if m == 1 {
                0.5 * (self.lo[i] + self.hi[i])
            } else {
                self.lo[i] + (self.hi[i] - self.lo[i]) * k as f64 / (m - 1) as f64
            }
        };
        let total = m.pow(self.dim as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = [0.0; 3];
                for (i, coord) in p.iter_mut().enumerate().take(self.dim) {
                    *coord = step(i, idx % m);
                    idx /= m;
                }
                p
            })
            .collect()
    }
}

/// Sampled Hölder seminorm `max |u(x)-u(y)| / |x-y|^α` over pairs at least
/// `h_min` apart.
pub fn holder_seminorm_samples(points: &[Point], values: &[f64], dim: usize, alpha: f64, h_min: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("Hölder exponent must lie in (0,1], got {alpha}")));
    }
    if points.len() < 2 || points.len() != values.len() {
        return Err(usage("Hölder seminorm needs at least two sampled points with values"));
    }
    let mut best = 0.0_f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = dist(&points[i][..dim], &points[j][..dim]);
            if d < h_min || d == 0.0 {
                continue;
            }
            best = best.max((values[i] - values[j]).abs() / d.powf(alpha));
        }
    }
    Ok(best)
}

pub fn holder_seminorm(field: &ScalarField, alpha: f64, domain_box: &SampleBox, h_min: f64) -> Result<f64> {
    let pts = domain_box.points();
    let vals: Vec<f64> = pts.iter().map(|p| field.eval(p)).collect();
    holder_seminorm_samples(&pts, &vals, field.dim, alpha, h_min)
}

/// Outcome of a randomized metadata audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditReport {
    /// largest |u| found outside the declared support (0 when none declared)
    pub exterior_max: f64,
    /// largest relative mismatch between the declared gradient and central differences
    pub grad_mismatch: f64,
    pub finite: bool,
}

/// Spot-checks declared metadata on random points: finiteness, zeros outside
/// a compact support, and gradient consistency at step `h`.
pub fn audit(field: &ScalarField, seed: u64, samples: usize, h: f64) -> AuditReport {
    let n = field.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exterior_max = 0.0_f64;
    let mut grad_mismatch = 0.0_f64;
    let mut finite = true;
    for _ in 0..samples {
        let mut x = [0.0; 3];
        for v in x.iter_mut().take(n) {
            *v = rng.random_range(-4.0..4.0);
        }
        let u = field.eval(&x);
        finite &= u.is_finite();
        if let Some(r) = field.decay.support_radius() {
            let mut y = [0.0; 3];
            let scale = r + 0.1 + rng.random_range(0.0..10.0);
            let nx = norm(&x[..n]).max(1e-12);
            for i in 0..n {
                y[i] = x[i] / nx * scale;
            }
            exterior_max = exterior_max.max(field.eval(&y).abs());
        }
        if let Some(g) = field.grad(&x) {
            if field.smooth_radius(&x) > 2.0 * h {
                for i in 0..n {
                    let mut xp = x;
                    let mut xm = x;
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (field.eval(&xp) - field.eval(&xm)) / (2.0 * h);
                    grad_mismatch = grad_mismatch.max((fd - g[i]).abs() / (1.0 + g[i].abs()));
                }
            }
        }
    }
    AuditReport { exterior_max, grad_mismatch, finite }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tol {
        Tol::new(1e-12, 1e-10)
    }

    #[test]
    fn l1s_of_constant_is_pi() {
        let r = check_l1s(&constant(1, 1.0), 0.5, tol(), 100_000).unwrap();
        assert!(r.finite);
        assert!((r.value - PI).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn l1s_diverges_for_critical_power() {
        for n in 1..=3 {
            let r = check_l1s(&abs_power(n, 0.6), 0.3, tol(), 10_000).unwrap();
            assert!(!r.finite);
        }
    }

    #[test]
    fn l1s_gaussian_finite_and_dominated_by_constant() {
        let g = check_l1s(&gaussian(2), 0.3, tol(), 100_000).unwrap();
        let c = check_l1s(&constant(2, 1.0), 0.3, tol(), 100_000).unwrap();
        assert!(g.finite && c.finite);
        assert!(g.value <= c.value);
    }

    #[test]
    fn seminorm_examples() {
        let bx = SampleBox { lo: [0.0; 3], hi: [1.0, 0.0, 0.0], dim: 1, per_axis: 65 };
        assert_eq!(holder_seminorm(&constant(1, 3.0), 0.5, &bx, 1e-3).unwrap(), 0.0);
        let lin = ScalarField::new(1, |x| x[0]);
        assert!((holder_seminorm(&lin, 1.0, &bx, 1e-3).unwrap() - 1.0).abs() < 1e-12);
        let bx = SampleBox { lo: [-1.0, 0.0, 0.0], hi: [1.0, 0.0, 0.0], dim: 1, per_axis: 2049 };
        let v = holder_seminorm(&x_plus_pow(0.5), 0.5, &bx, 1e-3).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn seminorm_rejects_bad_input() {
        assert!(holder_seminorm_samples(&[[0.0; 3]], &[1.0], 1, 0.5, 0.0).is_err());
        assert!(holder_seminorm_samples(&[[0.0; 3], [1.0, 0.0, 0.0]], &[1.0, 2.0], 1, 1.5, 0.0).is_err());
    }

    #[test]
    fn catalog_metadata_audits_clean() {
        for name in CATALOG_NAMES {
            for n in 1..=2 {
                if name == "xplus" && n > 1 {
                    assert!(catalog(name, n, 0.5).is_err());
                    continue;
                }
                let e = catalog(name, n, 0.5).unwrap();
                let a = audit(&e.field, 7, 200, 1e-4);
                assert!(a.finite, "{name}");
                assert_eq!(a.exterior_max, 0.0, "{name}");
                assert!(a.grad_mismatch < 1e-6, "{name}: {}", a.grad_mismatch);
            }
        }
        assert!(catalog("nope", 1, 0.5).is_err());
    }

    #[test]
    fn sphere_crossings() {
        let s = Surface::sphere([0.0; 3], 2.0);
        let mut t = s.crossings(&[1.0, 0.0], &[1.0, 0.0]);
        t.sort_by(f64::total_cmp);
        assert_eq!(t, vec![-3.0, 1.0]);
        let p = Surface::plane_axis(0, 0.5);
        assert_eq!(p.crossings(&[1.0], &[-1.0]), vec![0.5]);
    }

    #[test]
    fn transformed_fields_keep_breaks_aligned() {
        let b = bump(2);
        let t = b.translated(&[1.0, -2.0]);
        assert!((t.eval(&[1.0, -2.0]) - 1.0).abs() < 1e-15);
        assert!(t.smooth_radius(&[1.0, -2.0]) > 0.99);
        let d = b.dilated(2.0);
        // support edge of the dilated bump at radius 1
        assert!(d.breaks.iter().any(|s| s.distance(&[1.0, 0.0]) < 1e-14));
    }
}
