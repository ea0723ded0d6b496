use proptest::prelude::*;

use super::*;
use crate::error::Error;

fn chart_xy() -> Chart {
    Chart::new(vec!["x", "y"], vec![(0.5, 2.0), (0.5, 2.0)]).unwrap()
}

fn p(src: &str, chart: &Chart) -> ScalarExpr {
    parse_scalar(src, chart).unwrap()
}

/// Central finite difference, the independent oracle for symbolic
/// derivatives. Step 1e-5 per the derivative contract.
fn finite_difference(e: &ScalarExpr, point: &[f64], i: usize) -> f64 {
    let h = 1e-5;
    let mut hi = point.to_vec();
    let mut lo = point.to_vec();
    hi[i] += h;
    lo[i] -= h;
    (e.evaluate(&hi).unwrap() - e.evaluate(&lo).unwrap()) / (2.0 * h)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

// ---------------------------------------------------------------------------
// chart

#[test]
fn chart_rejects_bad_input() {
    assert!(Chart::new(Vec::<String>::new(), vec![]).is_err());
    assert!(Chart::new(vec!["x", "x"], vec![(0.0, 1.0), (0.0, 1.0)]).is_err());
    assert!(Chart::new(vec!["x"], vec![(1.0, 1.0)]).is_err());
    assert!(Chart::new(vec!["2x"], vec![(0.0, 1.0)]).is_err());
    assert!(Chart::new(vec!["sin"], vec![(0.0, 1.0)]).is_err());
    assert!(Chart::new(vec!["theta"], vec![(0.0, 1.0)]).is_ok());
}

// ---------------------------------------------------------------------------
// parsing

#[test]
fn parses_power_sum() {
    let c = chart_xy();
    let e = p("x^2 + y", &c);
    assert_eq!(e.evaluate(&[2.0, 3.0]).unwrap(), 7.0);
}

#[test]
fn parses_quotient_of_product() {
    let c = chart_xy();
    let e = p("1/(x*y)", &c);
    assert_eq!(e.evaluate(&[1.0, 1.0]).unwrap(), 1.0);
    assert_eq!(e.evaluate(&[2.0, 4.0]).unwrap(), 0.125);
}

#[test]
fn unknown_identifier_is_named() {
    let c = chart_xy();
    match parse_scalar("q", &c) {
        Err(Error::UnknownIdentifier { name, .. }) => assert_eq!(name, "q"),
        other => panic!("expected unknown-identifier error, got {other:?}"),
    }
}

#[test]
fn syntax_error_has_position() {
    let c = chart_xy();
    match parse_scalar("x + * y", &c) {
        Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn decimals_are_exact_rationals() {
    let c = chart_xy();
    let e = p("0.5", &c);
    assert_eq!(e, ScalarExpr::rational(&c, 1, 2));
    assert_eq!(p("3.25", &c), ScalarExpr::rational(&c, 13, 4));
}

#[test]
fn functions_parse_and_reject_bare_names() {
    let c = chart_xy();
    assert!(parse_scalar("sin(x) + tanh(y) + abs(x)", &c).is_ok());
    assert!(parse_scalar("sin + 1", &c).is_err());
}

#[test]
fn negative_exponent_parses() {
    let c = chart_xy();
    let e = p("x^-2", &c);
    assert_eq!(e.evaluate(&[2.0, 1.0]).unwrap(), 0.25);
}

#[test]
fn prefix_minus_binds_before_power() {
    // the grammar puts '-' inside base, so -x^2 is (-x)^2
    let c = chart_xy();
    let e = p("-x^2", &c);
    assert_eq!(e.evaluate(&[3.0, 1.0]).unwrap(), 9.0);
}

// ---------------------------------------------------------------------------
// evaluation

#[test]
fn evaluates_examples() {
    let c = chart_xy();
    assert_eq!(p("x^2 + y", &c).evaluate(&[2.0, 3.0]).unwrap(), 7.0);
    assert_eq!(p("1/(x*y)", &c).evaluate(&[1.0, 1.0]).unwrap(), 1.0);
}

#[test]
fn domain_errors_identify_the_node() {
    let c = chart_xy();
    match p("ln(x)", &c).evaluate(&[-1.0, 0.0]) {
        Err(Error::Domain { expr, .. }) => assert!(expr.contains("ln"), "got {expr}"),
        other => panic!("expected domain error, got {other:?}"),
    }
    assert!(p("sqrt(x)", &c).evaluate(&[-1.0, 0.0]).is_err());
    assert!(p("1/x", &c).evaluate(&[0.0, 0.0]).is_err());
    assert!(p("x^-1", &c).evaluate(&[0.0, 0.0]).is_err());
}

#[test]
fn params_evaluate_to_their_value() {
    let c = chart_xy();
    let t = ScalarExpr::param(&c, "t", 0.75);
    let e = t.mul(&ScalarExpr::coord(&c, 0));
    assert_eq!(e.evaluate(&[2.0, 0.0]).unwrap(), 1.5);
    assert_eq!(e.to_string(), "t*x");
}

// ---------------------------------------------------------------------------
// derivatives

#[test]
fn derivative_of_product_is_exact() {
    let c = chart_xy();
    let e = p("x*y", &c);
    assert_eq!(e.partial_derivative(0), p("y", &c));
}

#[test]
fn derivative_of_sin_is_cos() {
    let c = chart_xy();
    let e = p("sin(x)", &c);
    assert_eq!(e.partial_derivative(0), p("cos(x)", &c));
}

#[test]
fn derivative_of_reciprocal_matches_finite_difference() {
    // d/dx 1/(x*y) at (1,1) = -1, cross-checked against the oracle
    let c = chart_xy();
    let e = p("1/(x*y)", &c);
    let de = e.partial_derivative(0);
    let at = [1.0, 1.0];
    let sym = de.evaluate(&at).unwrap();
    assert!(rel_close(sym, -1.0, 1e-12), "symbolic {sym}");
    let fd = finite_difference(&e, &at, 0);
    assert!(rel_close(sym, fd, 1e-6), "fd {fd} vs sym {sym}");
}

#[test]
fn derivatives_match_finite_differences_on_function_battery() {
    let c = chart_xy();
    let battery = [
        "sin(x)*cos(y)",
        "exp(x - y)",
        "ln(x*y)",
        "sqrt(x + y)",
        "cosh(x)*sinh(y)",
        "tanh(x*y)",
        "abs(x) + abs(y)",
        "x^3*y^-2",
        "(x + y)/(x*y)",
        "exp(sin(x) + y^2)",
    ];
    let sampler = Sampler::default();
    for src in battery {
        let e = p(src, &c);
        for i in 0..2 {
            let de = e.partial_derivative(i);
            for k in 0..16 {
                let pt = sampler.point(&c, k);
                let sym = de.evaluate(&pt).unwrap();
                let fd = finite_difference(&e, &pt, i);
                assert!(
                    rel_close(sym, fd, 1e-6),
                    "{src} d{i} at {pt:?}: sym {sym} fd {fd}"
                );
            }
        }
    }
}

#[test]
fn derivative_linearity_holds_exactly() {
    let c = chart_xy();
    let e1 = p("sin(x*y)", &c);
    let e2 = p("x^2/y", &c);
    let a = ScalarExpr::rational(&c, 7, 3);
    let combined = a.mul(&e1).add(&e2).partial_derivative(0);
    let separate = a.mul(&e1.partial_derivative(0)).add(&e2.partial_derivative(0));
    let sampler = Sampler::default();
    for k in 0..sampler.count {
        let pt = sampler.point(&c, k);
        let lhs = combined.evaluate(&pt).unwrap();
        let rhs = separate.evaluate(&pt).unwrap();
        assert!(rel_close(lhs, rhs, 1e-12), "at {pt:?}: {lhs} vs {rhs}");
    }
}

#[test]
fn clairaut_mixed_partials_agree() {
    let c = chart_xy();
    for src in ["sin(x*y)*exp(x)", "x^3*y^2 + ln(x + y)", "sqrt(x*y + 1)"] {
        let e = p(src, &c);
        let dxy = e.partial_derivative(0).partial_derivative(1);
        let dyx = e.partial_derivative(1).partial_derivative(0);
        let sampler = Sampler::default();
        for k in 0..sampler.count {
            let pt = sampler.point(&c, k);
            let a = dxy.evaluate(&pt).unwrap();
            let b = dyx.evaluate(&pt).unwrap();
            assert!(rel_close(a, b, 1e-9), "{src} at {pt:?}: {a} vs {b}");
        }
    }
}

// ---------------------------------------------------------------------------
// simplify

#[test]
fn simplify_identities() {
    let c = chart_xy();
    assert_eq!(p("x + 0", &c).simplify(), p("x", &c));
    assert_eq!(p("(x*1) - x", &c).simplify(), ScalarExpr::zero(&c));
    assert_eq!(
        p("y", &c).mul(&p("x", &c).partial_derivative(1)).simplify(),
        ScalarExpr::zero(&c)
    );
    assert_eq!(p("x/x", &c).simplify(), ScalarExpr::one(&c));
    assert_eq!(p("x^0", &c).simplify(), ScalarExpr::one(&c));
    assert_eq!(p("2*x + 3*x", &c).simplify(), p("5*x", &c).simplify());
    assert_eq!(p("sqrt(4)", &c).simplify(), ScalarExpr::int(&c, 2));
    assert_eq!(p("sqrt(9/4)", &c).simplify(), ScalarExpr::rational(&c, 3, 2));
    assert_eq!(p("abs(0-3)", &c).simplify(), ScalarExpr::int(&c, 3));
}

#[test]
fn simplify_canonicalizes_mixed_partials_of_polynomials() {
    let c = chart_xy();
    let e = p("x^2*y^3 + x*y", &c);
    let dxy = e.partial_derivative(0).partial_derivative(1);
    let dyx = e.partial_derivative(1).partial_derivative(0);
    assert_eq!(dxy, dyx);
}

// ---------------------------------------------------------------------------
// zero tests and determinism

#[test]
fn zero_on_domain_trivial_zero() {
    let c = chart_xy();
    let e = p("x - x", &c);
    let v = zero_on_domain(&e, &Sampler::default(), 1e-9).unwrap();
    assert!(v.passed);
    assert_eq!(v.max_abs_residual, 0.0);
    assert_eq!(v.samples_used + v.samples_skipped, 64);
}

#[test]
fn zero_on_domain_trig_identity() {
    let c = chart_xy();
    let e = p("sin(x)^2 + cos(x)^2 - 1", &c);
    let v = zero_on_domain(&e, &Sampler::default(), 1e-9).unwrap();
    assert!(v.passed, "max residual {}", v.max_abs_residual);
}

#[test]
fn zero_on_domain_fails_with_witness() {
    let c = chart_xy();
    let e = p("x*y - 1", &c);
    let v = zero_on_domain(&e, &Sampler::default(), 1e-9).unwrap();
    assert!(!v.passed);
    let w = &v.witness;
    assert_eq!(w.len(), 2);
    let res = (w[0] * w[1] - 1.0).abs() / (1.0 + (w[0] * w[1]).abs().max(1.0));
    assert!(rel_close(res, v.max_abs_residual, 1e-12));
}

#[test]
fn verdicts_are_bitwise_deterministic() {
    let c = chart_xy();
    let e = p("sin(x)*y - x", &c);
    let s = Sampler::new(1234, 64, 1e-6);
    let a = zero_on_domain(&e, &s, 1e-9).unwrap();
    let b = zero_on_domain(&e, &s, 1e-9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.max_abs_residual.to_bits(), b.max_abs_residual.to_bits());
    assert_eq!(a.mean_abs_residual.to_bits(), b.mean_abs_residual.to_bits());
}

#[test]
fn guard_skips_singular_points_and_reports_when_excessive() {
    // denominator x - y vanishes on the diagonal; with a guard so large
    // every point is skipped, the check must abort with a diagnostic
    let c = chart_xy();
    let e = p("1/(x - y)", &c);
    let s = Sampler::new(42, 64, 1e6);
    match zero_on_domain(&e, &s, 1e-9) {
        Err(Error::TooManySkipped { skipped, count }) => {
            assert_eq!(count, 64);
            assert!(skipped > 32);
        }
        other => panic!("expected TooManySkipped, got {other:?}"),
    }
}

#[test]
fn sampler_points_depend_only_on_seed_and_index() {
    let c = chart_xy();
    let s = Sampler::new(7, 8, 1e-6);
    let all = s.points(&c);
    // drawing point 5 in isolation reproduces the batch value
    assert_eq!(s.point(&c, 5), all[5]);
    for pt in &all {
        for (v, &(lo, hi)) in pt.iter().zip(c.domain()) {
            assert!(*v >= lo && *v < hi);
        }
    }
}

// ---------------------------------------------------------------------------
// printing round-trips

#[test]
fn print_parse_round_trip_examples() {
    let c = chart_xy();
    for src in [
        "x^2 + y",
        "1/(x*y)",
        "-(x^2) + y",
        "sin(x)*cos(y) - tanh(x*y)",
        "(x + y)^3/(x - y)",
        "2/3*x - 5*y^-2",
    ] {
        let e = p(src, &c);
        let printed = e.to_string();
        let reparsed = p(&printed, &c);
        assert_eq!(
            reparsed.to_string(),
            printed,
            "printing is not a fixed point for {src}"
        );
        for k in 0..16 {
            let pt = Sampler::default().point(&c, k);
            match (e.evaluate(&pt), reparsed.evaluate(&pt)) {
                (Ok(a), Ok(b)) => assert!(rel_close(a, b, 1e-12), "{src} at {pt:?}"),
                (Err(_), Err(_)) => {}
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// property tests

fn arb_expr(chart: Chart) -> impl Strategy<Value = ScalarExpr> {
    let c0 = chart.clone();
    let leaf = prop_oneof![
        (-6i64..7).prop_map(move |k| ScalarExpr::int(&c0.clone(), k)),
        {
            let c = chart.clone();
            (0usize..2).prop_map(move |i| ScalarExpr::coord(&c, i))
        },
    ];
    let c1 = chart.clone();
    leaf.prop_recursive(4, 48, 3, move |inner| {
        let _ = &c1;
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(&b)),
            (inner.clone(), 1i64..4).prop_map(|(a, k)| a.powi(k)),
            inner.clone().prop_map(|a| a.neg()),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.exp().tanh()),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplify_preserves_semantics(e in arb_expr(chart_xy())) {
        let s = e.simplify();
        let sampler = Sampler::default();
        for k in 0..16 {
            let pt = sampler.point(&chart_xy(), k);
            match (e.evaluate(&pt), s.evaluate(&pt)) {
                (Ok(a), Ok(b)) => prop_assert!(
                    rel_close(a, b, 1e-12),
                    "simplify changed value at {:?}: {} vs {}", pt, a, b
                ),
                // simplification may remove a singularity but must not add one
                (Err(_), _) => {}
                (Ok(a), Err(e)) => prop_assert!(false, "simplify added singularity at {:?} ({}): {}", pt, a, e),
            }
        }
    }

    #[test]
    fn print_parse_preserves_semantics(e in arb_expr(chart_xy())) {
        let printed = e.to_string();
        let reparsed = parse_scalar(&printed, &chart_xy()).unwrap();
        let sampler = Sampler::default();
        for k in 0..8 {
            let pt = sampler.point(&chart_xy(), k);
            match (e.evaluate(&pt), reparsed.evaluate(&pt)) {
                (Ok(a), Ok(b)) => prop_assert!(
                    rel_close(a, b, 1e-12),
                    "round trip changed value of `{}` at {:?}: {} vs {}", printed, pt, a, b
                ),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "round trip of `{}` diverged: {:?}", printed, other),
            }
        }
    }
}
