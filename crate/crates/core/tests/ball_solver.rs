mod common;

use std::f64::consts::PI;

use fraclap::ball::{
    fundamental_solution, green_function, green_incomplete, mean_kernel, poisson_integral, poisson_kernel_ball,
    s_mean_average, solve_full, solve_homogeneous, solve_nonhomogeneous, tabulate_solution, BallProblem, Tabulation,
};
use fraclap::field::{self, Decay, ScalarField, Smoothness, Surface};
use fraclap::levy::{mc_solve_dirichlet, McConfig, McDomain};
use fraclap::pointwise::{frac_lap_point, QuadratureSpec};
use fraclap::special::kappa_ns;
use fraclap::Error;
use proptest::prelude::*;

use common::{integrate, integrate_graded, rel, torsion};

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn mean_kernel_values() {
    assert_eq!(mean_kernel(&[0.5], 1.0, 1, 0.5).unwrap(), 0.0);
    assert_eq!(mean_kernel(&[0.0, 1.0], 1.0, 2, 0.3).unwrap(), 0.0);
    let v = mean_kernel(&[2.0], 1.0, 1, 0.5).unwrap();
    assert!(rel(v, 1.0 / (2.0 * PI * 3f64.sqrt())) < 1e-14, "{v}");
}

#[test]
fn poisson_kernel_plug_in() {
    // x = 0, y = 2, r = 1, n = 1, s = 1/2
    let v = poisson_kernel_ball(&[0.0], &[2.0], 1.0, 1, 0.5).unwrap();
    assert!(rel(v, (1.0 / PI) * (1.0f64 / 3.0).sqrt() * 0.5) < 1e-14, "{v}");
    assert!(matches!(poisson_kernel_ball(&[1.0], &[2.0], 1.0, 1, 0.5), Err(Error::Domain(_))));
    assert!(matches!(poisson_kernel_ball(&[0.0], &[0.5], 1.0, 1, 0.5), Err(Error::Domain(_))));
}

#[test]
fn poisson_kernel_rotation() {
    let (c, s_) = (0.6f64, 0.8f64);
    let rot = |p: [f64; 2]| [c * p[0] - s_ * p[1], s_ * p[0] + c * p[1]];
    let (x, y) = ([0.3, -0.2], [1.1, 0.9]);
    let a = poisson_kernel_ball(&x, &y, 1.2, 2, 0.4).unwrap();
    let b = poisson_kernel_ball(&rot(x), &rot(y), 1.2, 2, 0.4).unwrap();
    assert!(rel(a, b) < 1e-13);
}

#[test]
fn constant_datum_is_reproduced() {
    for (n, s) in [(1, 0.3), (2, 0.5), (3, 0.7)] {
        let g = field::constant(n, 2.5);
        let avg = s_mean_average(&g, &[0.0; 3][..n], 0.7, s, &spec()).unwrap();
        assert!((avg - 2.5).abs() < 1e-8, "n={n} s={s}: {avg}");
        let mut x = [0.0; 3];
        x[0] = 0.4;
        let u = solve_homogeneous(&BallProblem::homogeneous(1.0, s, field::constant(n, 1.0)), &x[..n], &spec()).unwrap();
        assert!((u - 1.0).abs() < 1e-8, "n={n} s={s}: {u}");
    }
}

#[test]
fn mean_value_of_s_harmonic_solution() {
    let s = 0.4;
    let g = field::local_bump(1, [2.6, 0.0, 0.0], 1.0);
    let prob = BallProblem::homogeneous(2.0, s, g);
    let u = tabulate_solution(&prob, &Tabulation::default(), &spec()).unwrap();
    let u0 = solve_homogeneous(&prob, &[0.0], &spec()).unwrap();
    for r in [0.1, 0.3] {
        let avg = s_mean_average(&u, &[0.0], r, s, &spec()).unwrap();
        assert!((avg - u0).abs() < 1e-3 * u0.abs().max(1e-3), "r={r}: {avg} vs {u0}");
    }
}

#[test]
fn windowed_quadratic_average_is_positive() {
    let w = field::windowed_quadratic(2);
    let avg = s_mean_average(&w, &[0.0, 0.0], 0.5, 0.5, &spec()).unwrap();
    assert!(avg > 0.0);
}

#[test]
fn nonnegative_bump_gives_positive_solution() {
    let g = field::local_bump(2, [1.8, 0.0, 0.0], 0.8);
    let prob = BallProblem::homogeneous(1.0, 0.5, g);
    for x in [[0.0, 0.0], [-0.5, 0.3], [0.7, 0.0]] {
        let u = solve_homogeneous(&prob, &x, &spec()).unwrap();
        assert!(u > 0.0, "{x:?}: {u}");
    }
}

#[test]
fn homogeneous_solution_matches_monte_carlo() {
    let s = 0.5;
    let g = field::gaussian(1);
    let u = solve_homogeneous(&BallProblem::homogeneous(1.0, s, g.clone()), &[0.0], &spec()).unwrap();
    // independent quadrature of the Poisson integral at the center
    let kernel = |y: f64| (-y * y).exp() * (1.0 / (y * y - 1.0)).powf(s) / y;
    let oracle = 2.0 * (s * PI).sin() / PI * common::exterior_radial(kernel, 1.0, s);
    assert!(rel(u, oracle) < 1e-7, "{u} vs {oracle}");
    let cfg = McConfig { seed: 7, samples: 100_000, max_jumps: 200, domain: McDomain::Ball { center: [0.0; 3], r: 1.0 } };
    let mc = mc_solve_dirichlet(&g, &cfg, s, &[0.0]).unwrap();
    assert!((mc.estimate - u).abs() <= 3.0 * mc.stderr, "{} ± {} vs {u}", mc.estimate, mc.stderr);
}

#[test]
fn fundamental_solution_values() {
    let v = fundamental_solution(&[0.6, 0.8], 2, 0.5).unwrap();
    assert!(rel(v, 1.0 / (2.0 * PI)) < 1e-14);
    assert_eq!(fundamental_solution(&[1.0], 1, 0.5).unwrap(), 0.0);
    assert!((fundamental_solution(&[2.0], 1, 0.5).unwrap() + 2f64.ln() / PI).abs() < 1e-15);
    assert!(matches!(fundamental_solution(&[1.0], 1, 0.7), Err(Error::Unsupported(_))));
    assert!(matches!(fundamental_solution(&[0.0, 0.0], 2, 0.5), Err(Error::Singular(_))));
}

/// `b |x|^{2s-n}` with the core inside `B_δ` replaced by a C^1 cap.
fn capped_fundamental(n: usize, s: f64, delta: f64) -> ScalarField {
    let b = fundamental_solution(&[1.0, 0.0, 0.0][..n], n, s).unwrap();
    let p = n as f64 - 2.0 * s;
    ScalarField::new(n, move |x| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r >= delta {
            b * r.powf(-p)
        } else {
            // value and slope matched at δ
            let t = r / delta;
            b * delta.powf(-p) * (1.0 + 0.5 * p * (1.0 - t * t))
        }
    })
    .with_smoothness(Smoothness::C1Holder(1.0))
    .with_decay(Decay::PowerDecay { exponent: p, constant: b })
    .with_break(Surface::sphere([0.0; 3], delta))
}

#[test]
fn fundamental_solution_is_s_harmonic_away_from_pole() {
    for (n, s) in [(2, 0.5), (3, 0.5)] {
        let phi = capped_fundamental(n, s, 0.05);
        let mut x = [0.0; 3];
        x[0] = 2.0;
        let v = frac_lap_point(&phi, &x[..n], s, &spec()).unwrap().value;
        assert!(v.abs() < 1e-2, "n={n}: {v}");
    }
}

#[test]
fn green_function_closed_form_in_one_dimension() {
    let g = green_function(&[0.0], &[0.5], 1.0, 1, 0.5).unwrap();
    let want = ((1.0 + 0.75f64.sqrt()) / 0.5).ln() / PI;
    assert!(rel(g, want) < 1e-14, "{g} vs {want}");
    assert!(matches!(green_function(&[0.2], &[0.2], 1.0, 1, 0.5), Err(Error::Singular(_))));
    assert!(green_function(&[0.2], &[1.0], 1.0, 1, 0.5).is_err());
}

#[test]
fn green_function_matches_quadrature() {
    for (n, s, x, z) in [
        (1usize, 0.3f64, [0.1f64, 0.0, 0.0], [-0.4, 0.0, 0.0]),
        (2, 0.5, [0.2, 0.1, 0.0], [-0.3, 0.4, 0.0]),
        (3, 0.75, [0.0, 0.5, 0.1], [0.3, -0.2, 0.2]),
    ] {
        let r = 1.0;
        let d2: f64 = (0..n).map(|i| (x[i] - z[i]).powi(2)).sum();
        let x2: f64 = (0..n).map(|i| x[i] * x[i]).sum();
        let z2: f64 = (0..n).map(|i| z[i] * z[i]).sum();
        let big_r = (r * r - x2) * (r * r - z2) / (r * r * d2);
        let h = n as f64 / 2.0;
        let f = |t: f64| t.powf(s - 1.0) * (1.0 + t).powf(-h);
        let inc = integrate_graded(f, 0.0, big_r, 1.0 / s, 200);
        assert!(rel(green_incomplete(big_r, n, s), inc) < 1e-10);
        let want = kappa_ns(n, s).unwrap() * d2.sqrt().powf(2.0 * s - n as f64) * inc;
        let got = green_function(&x[..n], &z[..n], r, n, s).unwrap();
        assert!(rel(got, want) < 1e-10, "n={n}: {got} vs {want}");
        let sym = green_function(&z[..n], &x[..n], r, n, s).unwrap();
        assert!(rel(got, sym) < 1e-12);
    }
}

#[test]
fn green_function_vanishes_at_boundary() {
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-4, 1e-6] {
        let g = green_function(&[0.0, 0.0], &[1.0 - eps, 0.0], 1.0, 2, 0.5).unwrap();
        assert!(g < last);
        last = g;
    }
    assert!(last < 1e-2);
}

#[test]
fn kappa_limit_of_the_full_integral() {
    // R → ∞: the incomplete integral tends to Γ(s)Γ(n/2 - s)/Γ(n/2)
    let g = common::gamma_integral;
    let full = g(0.5) * g(1.0 - 0.5) / g(1.0);
    let big = green_incomplete(1e12, 2, 0.5);
    assert!((big - full).abs() < 1e-5, "{big} vs {full}");
}

#[test]
fn zero_source_gives_zero() {
    let prob = BallProblem::source(1.0, 0.5, field::constant(2, 0.0));
    assert_eq!(solve_nonhomogeneous(&prob, &[0.1, 0.2], &spec()).unwrap(), 0.0);
}

#[test]
fn constant_source_matches_torsion() {
    for (n, s) in [(1, 0.3), (2, 0.5), (3, 0.6)] {
        let prob = BallProblem::source(1.5, s, field::constant(n, 1.0));
        let mut x = [0.0; 3];
        x[0] = 0.5;
        let u = solve_nonhomogeneous(&prob, &x[..n], &spec()).unwrap();
        let want = torsion(n, s, 1.5, 0.25);
        assert!(rel(u, want) < 1e-6, "n={n} s={s}: {u} vs {want}");
        let double = BallProblem::source(1.5, s, field::constant(n, 2.0));
        let u2 = solve_nonhomogeneous(&double, &x[..n], &spec()).unwrap();
        assert!(rel(u2, 2.0 * u) < 1e-12);
    }
}

#[test]
fn full_solution_reduces_and_superposes() {
    let s = 0.5;
    let f = field::gaussian(1);
    let g = field::local_bump(1, [1.6, 0.0, 0.0], 0.6);
    let x = [0.25];
    let hom = BallProblem::homogeneous(1.0, s, g.clone());
    let src = BallProblem::source(1.0, s, f.clone());
    let uh = solve_homogeneous(&hom, &x, &spec()).unwrap();
    let us = solve_nonhomogeneous(&src, &x, &spec()).unwrap();
    assert_eq!(solve_full(&hom, &x, &spec()).unwrap().to_bits(), uh.to_bits());
    assert_eq!(solve_full(&src, &x, &spec()).unwrap().to_bits(), us.to_bits());
    let both = BallProblem { n: 1, r: 1.0, s, f: Some(f), g: Some(g) };
    assert!(rel(solve_full(&both, &x, &spec()).unwrap(), uh + us) < 1e-14);
}

#[test]
fn invalid_problems_are_rejected() {
    let wrong_dim = BallProblem { n: 2, r: 1.0, s: 0.5, f: Some(field::constant(1, 1.0)), g: None };
    assert!(solve_full(&wrong_dim, &[0.0, 0.0], &spec()).is_err());
    let grows = BallProblem::homogeneous(1.0, 0.25, field::abs_power(1, 1.0));
    assert!(matches!(solve_homogeneous(&grows, &[0.0], &spec()), Err(Error::Precondition(_))));
    let outside = BallProblem::source(1.0, 0.5, field::constant(1, 1.0));
    assert!(matches!(solve_nonhomogeneous(&outside, &[1.0], &spec()), Err(Error::Domain(_))));
    let bad_r = BallProblem::source(-1.0, 0.5, field::constant(1, 1.0));
    assert!(matches!(solve_nonhomogeneous(&bad_r, &[0.0], &spec()), Err(Error::Domain(_))));
    let direct = poisson_integral(&field::constant(1, 1.0), &[2.0], 1.0, 0.5, &spec());
    assert!(direct.is_err());
}

#[test]
fn tabulation_is_one_dimensional() {
    let prob = BallProblem::source(1.0, 0.5, field::constant(2, 1.0));
    assert!(matches!(tabulate_solution(&prob, &Tabulation::default(), &spec()), Err(Error::Unsupported(_))));
    let prob = BallProblem::source(1.0, 0.5, field::constant(1, 1.0));
    let u = tabulate_solution(&prob, &Tabulation { nodes: 24 }, &spec()).unwrap();
    for x in [-0.9, -0.3, 0.0, 0.55] {
        assert!(rel(u.eval(&[x]), torsion(1, 0.5, 1.0, x * x)) < 1e-6);
    }
    assert_eq!(u.eval(&[1.2]), 0.0);
}

#[test]
fn mean_kernel_total_mass() {
    // ∫ A_r = 1, checked in one dimension with an independent quadrature
    for s in [0.2, 0.5, 0.8] {
        let a = (PI * s).sin() / PI;
        let k = |y: f64| a * 0.5f64.powf(2.0 * s) * (y * y - 0.25).powf(-s) / y;
        let mass = 2.0 * common::exterior_radial(k, 0.5, s);
        assert!((mass - 1.0).abs() < 1e-8, "s={s}: {mass}");
        let tail = integrate(|y| mean_kernel(&[y], 0.5, 1, s).unwrap(), 0.6, 0.7, 10);
        let direct = integrate(k, 0.6, 0.7, 10);
        assert!(rel(tail, direct) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_nonnegative(
        s in 0.05f64..0.95, r in 0.2f64..3.0,
        xa in -0.99f64..0.99, xb in -0.99f64..0.99,
        ya in 1.01f64..5.0, th in 0.0f64..6.28,
    ) {
        let x = [xa * r * 0.7, xb * r * 0.7];
        let y = [ya * r * th.cos(), ya * r * th.sin()];
        prop_assert!(mean_kernel(&y, r, 2, s).unwrap() >= 0.0);
        prop_assert!(poisson_kernel_ball(&x, &y, r, 2, s).unwrap() >= 0.0);
        let z = [xb * r * 0.7, -xa * r * 0.7];
        if (x[0] - z[0]).abs() + (x[1] - z[1]).abs() > 1e-6 {
            prop_assert!(green_function(&x, &z, r, 2, s).unwrap() >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn comparison_principle(s in 0.2f64..0.8, c in 1.3f64..2.5, x in -0.8f64..0.8) {
        let lower = field::local_bump(1, [1.6, 0.0, 0.0], 0.6);
        let extra = field::local_bump(1, [-c, 0.0, 0.0], 0.5);
        let upper = ScalarField::combine(1.0, &lower, 1.0, &extra);
        let ul = solve_homogeneous(&BallProblem::homogeneous(1.0, s, lower), &[x], &spec()).unwrap();
        let uu = solve_homogeneous(&BallProblem::homogeneous(1.0, s, upper), &[x], &spec()).unwrap();
        prop_assert!(ul <= uu);
    }

    #[test]
    fn mean_value_reproduces_constants(s in 0.1f64..0.9, r in 0.2f64..2.0, c in -3.0f64..3.0, x0 in -1.0f64..1.0) {
        let avg = s_mean_average(&field::constant(2, c), &[x0, 0.5], r, s, &spec()).unwrap();
        prop_assert!((avg - c).abs() < 1e-8 * c.abs().max(1.0));
    }
}
