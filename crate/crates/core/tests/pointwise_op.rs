mod common;

use common::*;
use fraclap::error::Error;
use fraclap::field::{abs_power, bump, catalog, constant, gaussian, point, shifted_gaussian, x_plus_pow, Point, ScalarField};
use fraclap::pointwise::{frac_lap_grid, frac_lap_point, pairing_check, PairingGrid, QuadratureSpec, TailMode};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn op(u: &ScalarField, x: &[f64], s: f64) -> f64 {
    frac_lap_point(u, x, s, &spec()).unwrap().value
}

#[test]
fn constant_has_zero_image() {
    for n in 1..=3 {
        for s in [0.1, 0.5, 0.9] {
            let v = frac_lap_point(&constant(n, 2.0), &[0.3, -0.7, 0.2][..n], s, &spec()).unwrap();
            assert!(v.value.abs() < 1e-10, "n={n} s={s}: {}", v.value);
        }
    }
}

#[test]
fn half_line_power_is_harmonic_on_the_right() {
    let v = op(&x_plus_pow(0.5), &[1.0], 0.5);
    assert!(v.abs() < 1e-3, "{v}");
}

#[test]
fn gaussian_matches_fourier_integral() {
    for s in [0.2, 0.5, 0.8] {
        for x in [0.0, 0.5, 1.0, 2.5] {
            let (v, o) = (op(&gaussian(1), &[x], s), gaussian_frac_lap_1d(x, s));
            assert!((v - o).abs() < 1e-7 * o.abs().max(1e-2), "s={s} x={x}: {v} vs {o}");
        }
    }
    for s in [0.3, 0.7] {
        for r in [0.0, 0.6, 1.4] {
            let (v, o) = (op(&gaussian(2), &[r * 0.6, r * 0.8], s), gaussian_frac_lap_2d(r, s));
            assert!((v - o).abs() < 1e-6 * o.abs().max(1e-2), "s={s} r={r}: {v} vs {o}");
        }
    }
}

#[test]
fn tail_modes_agree() {
    let analytic = QuadratureSpec { tail_mode: TailMode::AnalyticPower, ..spec() };
    for (u, x) in [(gaussian(1), vec![0.4]), (bump(2), vec![0.5, 1.2]), (x_plus_pow(0.4), vec![0.7])] {
        let a = frac_lap_point(&u, &x, 0.4, &analytic).unwrap().value;
        let b = frac_lap_point(&u, &x, 0.4, &spec()).unwrap().value;
        assert!((a - b).abs() < 1e-7 * a.abs().max(1e-3), "{}: {a} vs {b}", u.name);
    }
}

#[test]
fn op_value_invariants() {
    let sp = spec();
    for name in ["gaussian", "bump", "windowed-quadratic", "shifted-gaussian"] {
        let u = catalog(name, 2, 0.5).unwrap().field;
        let v = frac_lap_point(&u, &[0.3, 0.9], 0.35, &sp).unwrap();
        assert!(v.err_est.is_finite() && v.err_est >= 0.0);
        assert!(v.nodes_used <= sp.max_nodes);
    }
}

#[test]
fn preconditions_are_enforced() {
    // |x| grows faster than L^1_s allows for s = 0.3
    assert!(matches!(frac_lap_point(&abs_power(1, 1.0), &[0.5], 0.3, &spec()), Err(Error::Precondition(_))));
    // x_+^{0.3} is only 0.3-Hölder at its kink, below 2s
    assert!(matches!(frac_lap_point(&x_plus_pow(0.3), &[0.0], 0.3, &spec()), Err(Error::Precondition(_))));
    assert!(matches!(frac_lap_point(&gaussian(1), &[0.0], 0.0005, &spec()), Err(Error::Domain(_))));
    assert!(matches!(frac_lap_point(&gaussian(1), &[0.0], 0.9995, &spec()), Err(Error::Domain(_))));
    let bad = QuadratureSpec { delta: 10.0, ..spec() };
    assert!(frac_lap_point(&gaussian(1), &[0.0], 0.5, &bad).is_err());
}

#[test]
fn node_budget_exhaustion_carries_best_estimate() {
    let tight = QuadratureSpec { max_nodes: 100, tol_rel: 1e-15, tol_abs: 1e-16, ..spec() };
    match frac_lap_point(&shifted_gaussian(1, point(&[0.3]), 0.05, 1.0), &[0.0], 0.5, &tight) {
        Err(Error::Convergence { best, err_est, .. }) => assert!(best.is_finite() && err_est.is_finite()),
        other => panic!("expected a convergence failure, got {other:?}"),
    }
}

#[test]
fn grid_examples() {
    let sp = spec();
    assert!(frac_lap_grid(&gaussian(1), &[], 0.5, &sp).unwrap().is_empty());
    let pts: Vec<Point> = (0..11).map(|i| point(&[-1.0 + 0.2 * i as f64])).collect();
    let grid = frac_lap_grid(&gaussian(1), &pts, 0.5, &sp).unwrap();
    for (p, g) in pts.iter().zip(&grid) {
        let single = frac_lap_point(&gaussian(1), p, 0.5, &sp).unwrap();
        assert_eq!(g.value.to_bits(), single.value.to_bits());
        assert_eq!(g, &single);
    }
    let dup = frac_lap_grid(&gaussian(2), &[point(&[0.1, 0.2]), point(&[0.1, 0.2])], 0.4, &sp).unwrap();
    assert_eq!(dup[0], dup[1]);
}

#[test]
fn pairing_examples() {
    let sp = spec();
    let grid = PairingGrid::default();
    let p = pairing_check(&gaussian(1), &gaussian(1), 0.4, &sp, &grid).unwrap();
    assert!(rel(p.lhs, p.rhs) < 1e-3, "{p:?}");
    let v = shifted_gaussian(1, point(&[0.7]), 0.8, 1.0);
    let p = pairing_check(&gaussian(1), &v, 0.6, &sp, &grid).unwrap();
    assert!(rel(p.lhs, p.rhs) < 1e-3, "{p:?}");
    let p = pairing_check(&gaussian(2), &gaussian(2), 0.5, &sp, &PairingGrid { half_width: 5.0, panels: 10, order: 6 }).unwrap();
    assert!(rel(p.lhs, p.rhs) < 1e-3, "{p:?}");
    let zero = ScalarField::new(1, |_| 0.0);
    let p = pairing_check(&bump(1), &zero, 0.5, &sp, &grid).unwrap();
    assert_eq!((p.lhs, p.rhs), (0.0, 0.0));
}

#[test]
fn limits_in_the_order() {
    let u = |x: &[f64]| (-x[0] * x[0]).exp();
    for x in [0.0, 0.3, 0.5, 1.0, 1.5] {
        assert!(rel(op(&gaussian(1), &[x], 0.001), u(&[x])) < 0.02);
        assert!(rel(op(&gaussian(1), &[x], 0.999), neg_laplacian_fd(u, &[x])) < 0.02);
    }
}

#[test]
fn far_field_decay_of_the_bump() {
    for n in 1..=3 {
        for s in [0.3, 0.7] {
            let scaled: Vec<f64> = [4.0, 8.0]
                .iter()
                .map(|&r| {
                    let mut x = [0.0; 3];
                    x[0] = r;
                    let v = op(&bump(n), &x[..n], s);
                    assert!(v < 0.0, "n={n} s={s} r={r}: {v}");
                    -v * r.powf(n as f64 + 2.0 * s)
                })
                .collect();
            let ratio = scaled[0].max(scaled[1]) / scaled[0].min(scaled[1]);
            assert!(ratio <= 10.0, "n={n} s={s}: {scaled:?}");
        }
    }
}

fn rotation(theta: f64) -> [[f64; 3]; 3] {
    let (c, s) = (theta.cos(), theta.sin());
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn homogeneity(x in -2.0f64..2.0, s in 0.1f64..0.9, big in proptest::bool::ANY) {
        let lambda = if big { 2.0 } else { 0.5 };
        let g = gaussian(1);
        let a = frac_lap_point(&g.dilated(lambda), &[x], s, &spec()).unwrap();
        let b = frac_lap_point(&g, &[lambda * x], s, &spec()).unwrap();
        let scaled = lambda.powf(2.0 * s) * b.value;
        prop_assert!((a.value - scaled).abs() <= 10.0 * (a.err_est + lambda.powf(2.0 * s) * b.err_est) + 1e-9);
    }

    #[test]
    fn linearity(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, x in -1.5f64..1.5, s in 0.1f64..0.9) {
        let u = gaussian(1);
        let v = shifted_gaussian(1, point(&[0.5]), 0.6, 1.0);
        let sp = spec();
        let w = frac_lap_point(&ScalarField::combine(alpha, &u, beta, &v), &[x], s, &sp).unwrap();
        let (ou, ov) = (frac_lap_point(&u, &[x], s, &sp).unwrap(), frac_lap_point(&v, &[x], s, &sp).unwrap());
        let expect = alpha * ou.value + beta * ov.value;
        let budget = w.err_est + alpha.abs() * ou.err_est + beta.abs() * ov.err_est;
        prop_assert!((w.value - expect).abs() <= 10.0 * budget + 1e-9, "{} vs {}", w.value, expect);
    }

    #[test]
    fn translation_invariance(sx in -1.0f64..1.0, sy in -1.0f64..1.0, x in -1.0f64..1.0, s in 0.2f64..0.8) {
        let g = gaussian(2);
        let a = op(&g, &[x, 0.3], s);
        let b = op(&g.translated(&[sx, sy]), &[x + sx, 0.3 + sy], s);
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
    }

    #[test]
    fn rotation_invariance(theta in 0.0f64..6.28, x in -1.0f64..1.0, s in 0.2f64..0.8) {
        let g = shifted_gaussian(2, point(&[0.4, -0.2]), 0.9, 1.0);
        let q = rotation(theta);
        let p = [x, 0.5];
        let qp = [q[0][0] * p[0] + q[0][1] * p[1], q[1][0] * p[0] + q[1][1] * p[1]];
        let a = op(&g, &p, s);
        let b = op(&g.rotated(q), &qp, s);
        prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1.0), "{} vs {}", a, b);
    }
}
