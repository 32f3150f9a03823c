//! Reference quadratures used as test oracles. Kept separate from the
//! library's own rules on purpose.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre with `panels` equal panels of order 20.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mut part = 0.0;
        for &(x, w) in &rule {
            part += w * f(lo + 0.5 * h * (x + 1.0));
        }
        total += 0.5 * h * part;
    }
    total
}

/// `∫_a^b f` when `f` behaves like a power of `t - a` near `a`: the
/// substitution `t = a + (b - a) u^k` flattens it.
pub fn integrate_graded(f: impl Fn(f64) -> f64, a: f64, b: f64, k: f64, panels: usize) -> f64 {
    integrate(|u| if u <= 0.0 { 0.0 } else { f(a + (b - a) * u.powf(k)) * (b - a) * k * u.powf(k - 1.0) }, 0.0, 1.0, panels)
}

/// `∫_0^∞ (1 - cos t) t^{-1-2s} dt`: graded panels near 0, whole periods up
/// to `T = 2πK`, then the tail after two integrations by parts.
pub fn one_minus_cos_radial(s: f64) -> f64 {
    let k = 400;
    let big_t = 2.0 * PI * k as f64;
    let p = 1.0 + 2.0 * s;
    let f = |t: f64| 2.0 * (0.5 * t).sin().powi(2) * t.powf(-p);
    let head = integrate_graded(f, 0.0, 1.0, 4.0, 40);
    let mut body = integrate(f, 1.0, 2.0 * PI, 20);
    for j in 1..k {
        body += integrate(f, 2.0 * PI * j as f64, 2.0 * PI * (j + 1) as f64, 4);
    }
    // ∫_T^∞ t^{-p} = T^{1-p}/(p-1); ∫_T^∞ cos t t^{-p} = p T^{-p-1} + O(T^{-p-3})
    let tail = big_t.powf(1.0 - p) / (p - 1.0) - p * big_t.powf(-p - 1.0);
    head + body + tail
}

/// `∫_{S^{n-1}} |θ_1|^{2s} dθ`.
pub fn sphere_moment(n: usize, s: f64) -> f64 {
    match n {
        1 => 2.0,
        2 => 4.0 * integrate_graded(|phi| (PI / 2.0 - phi).cos().powf(2.0 * s), 0.0, PI / 2.0, 3.0, 40),
        3 => 2.0 * PI * 2.0 * integrate_graded(|t| t.powf(2.0 * s), 0.0, 1.0, 3.0, 20),
        _ => unreachable!(),
    }
}

/// `∫_{R^n} (1 - cos ζ_1) / |ζ|^{n+2s} dζ`.
pub fn cosine_integral(n: usize, s: f64) -> f64 {
    sphere_moment(n, s) * one_minus_cos_radial(s)
}

/// `Γ(x) = ∫_0^∞ t^{x-1} e^{-t} dt`.
pub fn gamma_integral(x: f64) -> f64 {
    // on [0, 1] expand e^{-t} termwise
    let mut head = 0.0;
    let mut fact = 1.0;
    for j in 0..40 {
        if j > 0 {
            fact *= j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        head += sign / (fact * (x + j as f64));
    }
    head + integrate(|t: f64| t.powf(x - 1.0) * (-t).exp(), 1.0, 80.0 + 4.0 * x, 200)
}

pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!(),
    }
}

/// `∫_r^∞ f(ρ) dρ` for integrands with a `(ρ - r)^{-s}` edge and a
/// `ρ^{-1-2s}` tail, through `σ = ρ²/r² - 1`.
pub fn exterior_radial(f: impl Fn(f64) -> f64, r: f64, s: f64) -> f64 {
    let rho = |sig: f64| r * (1.0 + sig).sqrt();
    let drho = |sig: f64| r / (2.0 * (1.0 + sig).sqrt());
    // below σ0 the caller's ρ² - r² has no digits left, so the edge piece
    // uses the leading behaviour σ^{-s} h(σ0)
    let sig0: f64 = 1e-7;
    let k = 1.0 / (1.0 - s);
    let g = |sig: f64| f(rho(sig)) * drho(sig);
    let u0 = sig0.powf(1.0 / k);
    let inner = integrate(|u| g(u.powf(k)) * k * u.powf(k - 1.0), u0, 1.0, 60);
    let edge = g(sig0) * sig0 / (1.0 - s);
    // σ = v^{-1/s}, then v = w^4 to flatten the v^{1/s} corrections
    let outer = integrate_graded(
        |v| {
            let sig = v.powf(-1.0 / s);
            if !sig.is_finite() {
                return 0.0;
            }
            f(rho(sig)) * drho(sig) * sig / (s * v)
        },
        0.0,
        1.0,
        4.0,
        200,
    );
    edge + inner + outer
}

/// `(-Δ)^s e^{-x²}` at `x` from the Fourier integral
/// `2√π ∫_0^∞ (2πξ)^{2s} e^{-π²ξ²} cos(2πξx) dξ`.
pub fn gaussian_frac_lap_1d(x: f64, s: f64) -> f64 {
    let f = |xi: f64| (2.0 * PI * xi).powf(2.0 * s) * (-PI * PI * xi * xi).exp() * (2.0 * PI * xi * x).cos();
    2.0 * PI.sqrt() * (integrate_graded(f, 0.0, 0.5, 2.0, 20) + integrate(f, 0.5, 4.0, 80))
}

/// Bessel `J_0(z) = (1/π) ∫_0^π cos(z sin θ) dθ`.
pub fn bessel_j0(z: f64) -> f64 {
    integrate(|t| (z * t.sin()).cos(), 0.0, PI, 8 + (z.abs() as usize)) / PI
}

/// `(-Δ)^s e^{-|x|²}` in the plane at radius `r`, Hankel form.
pub fn gaussian_frac_lap_2d(r: f64, s: f64) -> f64 {
    let f = |rho: f64| (2.0 * PI * rho).powf(2.0 * s) * PI * (-PI * PI * rho * rho).exp() * bessel_j0(2.0 * PI * rho * r) * rho;
    2.0 * PI * (integrate_graded(f, 0.0, 0.5, 2.0, 20) + integrate(f, 0.5, 4.0, 60))
}

/// Half-plane harmonic extension of `e^{-x²}` by the Cauchy kernel, through
/// `ξ = x + y tan θ`.
pub fn cauchy_extension(x: f64, y: f64) -> f64 {
    integrate(|th| (-(x + y * th.tan()).powi(2)).exp(), -PI / 2.0, PI / 2.0, 400) / PI
}

/// Ball torsion function: solution of `(-Δ)^s u = 1` in `B_r`, `u = 0` outside.
pub fn torsion(n: usize, s: f64, r: f64, x2: f64) -> f64 {
    let h = n as f64 / 2.0;
    let g = |v: f64| gamma_integral(v);
    g(h) / (4f64.powf(s) * g(1.0 + s) * g(h + s)) * (r * r - x2).powf(s)
}

/// `-Δ e^{-|x|²}` in dimension `n` from central differences.
pub fn neg_laplacian_fd(u: impl Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
    let h = 1e-3;
    let mut total = 0.0;
    for i in 0..x.len() {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[i] += h;
        m[i] -= h;
        total -= (u(&p) - 2.0 * u(x) + u(&m)) / (h * h);
    }
    total
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
