use fraclap::density::HarnackDemo;
use fraclap::field::{self, point};
use fraclap::pointwise::QuadratureSpec;
use fraclap::verify::{
    check_comparison, check_harnack, check_max_principle, check_regularity_estimates, default_harnack_cases,
    holder_ratio, run_suite, BallCase, Datum, HarnackCase, RegularitySampling, Report, Suite, Threshold, Verdict,
};
use fraclap::Error;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn bump_case(n: usize, s: f64, amp: f64) -> BallCase {
    BallCase { n, r: 1.0, s, datum: Datum::Bump { center: point(&[1.7, 0.0]), width: 0.8, amp } }
}

#[test]
fn nonnegative_bump_passes_strictly() {
    let reports = check_max_principle(&[bump_case(1, 0.4, 1.0), bump_case(2, 0.6, 1.0)], 7, &spec()).unwrap();
    for r in &reports {
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.get("min_u").unwrap() > 0.0);
        assert_eq!(r.get("strictly_positive"), Some(1.0));
    }
}

#[test]
fn zero_datum_gives_zero_solution() {
    let case = BallCase { n: 2, r: 1.3, s: 0.5, datum: Datum::Zero };
    let r = &check_max_principle(&[case], 5, &spec()).unwrap()[0];
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.get("max_abs_u").unwrap() <= 1e-10);
}

#[test]
fn sign_changing_datum_is_skipped() {
    let case = BallCase { n: 1, r: 1.0, s: 0.5, datum: Datum::Dipole { center: point(&[2.0]), width: 1.0 } };
    let r = &check_max_principle(&[case], 5, &spec()).unwrap()[0];
    assert_eq!(r.verdict, Verdict::Reported);
    assert_eq!(r.threshold, Threshold::ReportedOnly);
    assert_eq!(r.get("skipped_sign_changing_datum"), Some(1.0));
    assert!(r.get("datum_min").unwrap() < 0.0);
}

#[test]
fn comparison_ordered_and_unordered() {
    let lo = bump_case(1, 0.3, 0.5);
    let hi = bump_case(1, 0.3, 2.0);
    let r = check_comparison(&lo, &hi, 9, &spec()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.get("min_u2_minus_u1").unwrap() > 0.0);
    let swapped = check_comparison(&hi, &lo, 9, &spec()).unwrap();
    assert_eq!(swapped.verdict, Verdict::Reported);
    let other_ball = BallCase { r: 2.0, ..hi };
    assert!(matches!(check_comparison(&lo, &other_ball, 9, &spec()), Err(Error::Usage(_))));
}

#[test]
fn harnack_nonnegative_branch() {
    let reports = check_harnack(&default_harnack_cases(), &[], 0.5, &HarnackDemo::default(), &spec()).unwrap();
    assert_eq!(reports.len(), 3);
    for r in &reports {
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let ratio = r.get("ratio").unwrap();
        assert!(ratio.is_finite() && ratio >= 1.0);
        assert!(r.get("relative_change").unwrap() <= 0.1);
    }
    let bad = HarnackCase { n: 1, s: 0.5, x0: point(&[0.0]), r: 1.0, datum: Datum::Dipole { center: point(&[2.0]), width: 1.0 } };
    assert!(check_harnack(&[bad], &[], 0.5, &HarnackDemo::default(), &spec()).is_err());
}

#[test]
fn harnack_failure_branch() {
    let reports = check_harnack(&[], &[0.1, 0.01], 0.5, &HarnackDemo::default(), &spec()).unwrap();
    let summary = &reports[0];
    assert_eq!(summary.check_name, "harnack_failure");
    assert_eq!(summary.verdict, Verdict::Pass, "{summary:?}");
    assert!(summary.get("growth").unwrap() >= 5.0);
    for e in [0.1, 0.01] {
        assert!(summary.get(&format!("fit_error_eps_{e}")).unwrap() <= e);
    }
}

#[test]
fn holder_ratio_is_stable_and_scale_free() {
    let g = field::gaussian(1);
    let a = holder_ratio(&g, 1.0, 0.3, 2.0, 41, &spec()).unwrap();
    let b = holder_ratio(&g, 1.0, 0.3, 2.0, 81, &spec()).unwrap();
    assert!(a.is_finite() && (b / a - 1.0).abs() <= 0.2, "{a} {b}");
    let twice = holder_ratio(&g.scaled_by(2.0), 1.0, 0.3, 2.0, 41, &spec()).unwrap();
    assert!((twice / a - 1.0).abs() < 1e-9, "{twice} vs {a}");
}

#[test]
fn regularity_rejects_low_alpha() {
    let fields = vec![field::gaussian(1)];
    let r = check_regularity_estimates(&fields, 0.5, 0.3, &RegularitySampling::default(), &spec());
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn regularity_suite_reports() {
    let reports = run_suite(Suite::Regularity, &spec()).unwrap();
    assert!(reports.iter().all(Report::passed), "{reports:?}");
    let scaling = reports.iter().find(|r| r.check_name == "regularity_derivative_scaling").unwrap();
    assert_eq!(scaling.verdict, Verdict::Reported);
    for key in ["du_ratio_to_r2", "du_ratio_to_r4"] {
        let q = scaling.get(key).unwrap();
        assert!((1.0..=4.0).contains(&q), "{key}: {q}");
    }
}

#[test]
fn max_suite_passes_and_is_reproducible() {
    let a = run_suite(Suite::Max, &spec()).unwrap();
    assert!(a.iter().all(Report::passed));
    assert!(a.iter().any(|r| r.verdict == Verdict::Reported));
    let b = run_suite(Suite::Max, &spec()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn report_round_trips_through_json() {
    let r = &check_max_principle(&[bump_case(1, 0.5, 1.0)], 3, &spec()).unwrap()[0];
    let text = serde_json::to_string(r).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, r);
    let reported = Report { threshold: Threshold::ReportedOnly, verdict: Verdict::Reported, ..r.clone() };
    let text = serde_json::to_string(&reported).unwrap();
    assert!(text.contains("\"reported-only\"") && text.contains("\"reported\""));
    assert_eq!(serde_json::from_str::<Report>(&text).unwrap(), reported);
}
