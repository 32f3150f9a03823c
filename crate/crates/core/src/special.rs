//! Gamma function and the normalization constants of the kernels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

// Lanczos series with g = 671/128, 14 terms
const LANCZOS_SHIFT: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

fn ln_gamma_series(x: f64) -> f64 {
    let t = x + LANCZOS_SHIFT;
    let mut ser = LANCZOS_C0;
    for (j, c) in LANCZOS.iter().enumerate() {
        ser += c / (x + 1.0 + j as f64);
    }
    (x + 0.5) * t.ln() - t + (2.506_628_274_631_000_5 * ser / x).ln()
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    ln_gamma_series(x).exp()
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("gamma requires a positive finite argument, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("ln_gamma requires a positive finite argument, got {x}")));
    }
    if x < 0.5 {
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    Ok(ln_gamma_series(x))
}

pub(crate) fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(domain(format!("order s must lie in (0,1), got {s}")));
    }
    Ok(())
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(domain("dimension must be positive"));
    }
    Ok(())
}

/// Surface measure of the unit sphere in R^n, i.e. ω_{n-1} = 2π^{n/2}/Γ(n/2).
pub fn sphere_measure(n: usize) -> Result<f64> {
    check_dim(n)?;
    let h = n as f64 / 2.0;
    Ok(2.0 * PI.powf(h) / gamma(h)?)
}

/// Normalization of the singular-integral form,
/// `s 4^s Γ((n+2s)/2) / (π^{n/2} Γ(1-s))`.
///
/// This is the reciprocal of `∫ (1 - cos ζ_1)/|ζ|^{n+2s} dζ`, which is what
/// makes the operator coincide with the Fourier multiplier `(2π|ξ|)^{2s}`.
pub fn c_ns(n: usize, s: f64) -> Result<f64> {
    check_dim(n)?;
    check_order(s)?;
    let nf = n as f64;
    Ok(s * 4f64.powf(s) * gamma((nf + 2.0 * s) / 2.0)? / (PI.powf(nf / 2.0) * gamma(1.0 - s)?))
}

/// Constant of the s-mean kernel and of the ball Poisson kernel,
/// `sin(πs) Γ(n/2) / π^{n/2+1}`.
pub fn a_ns(n: usize, s: f64) -> Result<f64> {
    check_dim(n)?;
    check_order(s)?;
    let h = n as f64 / 2.0;
    Ok((PI * s).sin() * gamma(h)? / PI.powf(h + 1.0))
}

/// Fundamental-solution constant `Γ(n/2 - s) / (4^s π^{n/2} Γ(s))`, defined
/// for n > 2s.
pub fn b_ns(n: usize, s: f64) -> Result<f64> {
    check_dim(n)?;
    check_order(s)?;
    let h = n as f64 / 2.0;
    if !(h > s) {
        return Err(domain(format!("fundamental-solution constant needs n > 2s (n={n}, s={s})")));
    }
    Ok(gamma(h - s)? / (4f64.powf(s) * PI.powf(h) * gamma(s)?))
}

/// Green-function constant `Γ(n/2) / (4^s π^{n/2} Γ(s)^2)`.
pub fn kappa_ns(n: usize, s: f64) -> Result<f64> {
    check_dim(n)?;
    check_order(s)?;
    let h = n as f64 / 2.0;
    let gs = gamma(s)?;
    Ok(gamma(h)? / (4f64.powf(s) * PI.powf(h) * gs * gs))
}

/// Half-space Poisson constant making `∫ B y^{2s}/(|x|^2+y^2)^{(n+2s)/2} dx = 1`,
/// namely `Γ((n+2s)/2) / (π^{n/2} Γ(s))`.
pub fn b_half_ns(n: usize, s: f64) -> Result<f64> {
    check_dim(n)?;
    check_order(s)?;
    let h = n as f64 / 2.0;
    Ok(gamma(h + s)? / (PI.powf(h) * gamma(s)?))
}

/// All constants for one `(n, s)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantSet {
    pub n: usize,
    pub s: f64,
    /// singular-integral constant c_{n,s}
    pub c: f64,
    /// s-mean kernel constant a_{n,s}
    pub a: f64,
    /// ball Poisson constant C_{n,s}
    pub c_pois: f64,
    /// fundamental-solution constant, absent unless n > 2s
    pub b: Option<f64>,
    pub kappa: f64,
    pub b_half: f64,
    /// measure of the unit sphere S^{n-1}
    pub omega: f64,
}

pub fn constant_set(n: usize, s: f64) -> Result<ConstantSet> {
    check_dim(n)?;
    check_order(s)?;
    let a = a_ns(n, s)?;
    Ok(ConstantSet {
        n,
        s,
        c: c_ns(n, s)?,
        a,
        c_pois: a,
        b: if n as f64 > 2.0 * s { Some(b_ns(n, s)?) } else { None },
        kappa: kappa_ns(n, s)?,
        b_half: b_half_ns(n, s)?,
        omega: sphere_measure(n)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_trivial_values() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma(0.5).unwrap() - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma(0.0), Err(crate::Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(crate::Error::Domain(_))));
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.01, 0.3, 0.5, 1.7, 4.2, 20.5] {
            let g: f64 = gamma(x).unwrap();
            assert!((ln_gamma(x).unwrap() - g.ln()).abs() < 1e-12 * g.ln().abs().max(1.0));
        }
    }

    #[test]
    fn c_one_half_is_one_over_pi() {
        assert!((c_ns(1, 0.5).unwrap() - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn constant_set_examples() {
        let cs = constant_set(1, 0.5).unwrap();
        assert!((cs.a - 1.0 / PI).abs() < 1e-14);
        assert_eq!(cs.a, cs.c_pois);
        assert!(cs.b.is_none());
        assert!(constant_set(2, 0.75).unwrap().b.is_some());
        assert!(constant_set(1, 0.75).unwrap().b.is_none());
        // b_{2,1/2} = 1/(2π)
        assert!((b_ns(2, 0.5).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-14);
        // half-space kernel at s = 1/2, n = 1 is the Cauchy kernel y/(π(x²+y²))
        assert!((cs.b_half - 1.0 / PI).abs() < 1e-14);
        assert!((cs.omega - 2.0).abs() < 1e-14);
    }

    #[test]
    fn orders_outside_unit_interval_are_rejected() {
        assert!(c_ns(1, 0.0).is_err());
        assert!(c_ns(1, 1.0).is_err());
        assert!(constant_set(0, 0.5).is_err());
    }
}
