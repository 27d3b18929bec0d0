use floquet_embed::numerics::{
    cumulative_integral, find_root_bracketed, fit_line, golden_max, integrate_function, integrate_ivp, integrate_with_breaks, sample_ivp,
    IvpOptions, Method,
};
use floquet_embed::Error;
use proptest::prelude::*;

#[test]
fn both_methods_solve_the_oscillator() {
    for method in [Method::DormandPrince54, Method::Verner98] {
        let opts = IvpOptions::new(1e-11, 1e-13).with_method(method);
        let w = 3.0;
        let traj = integrate_ivp(|_x: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -w * w * y[0];
        }, 0.0, 20.0, &[1.0, 0.0], &opts)
        .unwrap();
        // Dense output between knots, not only at them.
        for x in [0.123, 4.56, 13.37, 20.0] {
            let y = traj.eval(x);
            assert!((y[0] - (w * x).cos()).abs() < 1e-8, "{method:?} {x}");
            assert!((y[1] + w * (w * x).sin()).abs() < 1e-8 * w, "{method:?} {x}");
        }
    }
}

#[test]
fn breakpoints_are_hit_exactly() {
    // y' = step(x - 1): the kink at 1 is resolved exactly when declared.
    let opts = IvpOptions::new(1e-12, 1e-14).with_breakpoints(vec![1.0]);
    let grid = [0.5, 1.0, 1.5, 3.0];
    let sol = sample_ivp(|x: f64, _y: &[f64], dy: &mut [f64]| dy[0] = if x >= 1.0 { 1.0 } else { 0.0 }, 0.0, 3.0, &[0.0], &opts, &grid).unwrap();
    for (i, want) in [0.0, 0.0, 0.5, 2.0].iter().enumerate() {
        assert!((sol.row(i)[0] - want).abs() < 1e-12, "{i}: {}", sol.row(i)[0]);
    }
}

#[test]
fn blow_up_is_reported() {
    let opts = IvpOptions::new(1e-10, 1e-12);
    let r = integrate_ivp(|_x: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0], 0.0, 2.0, &[1.0], &opts);
    assert!(r.is_err());
}

#[test]
fn quadrature_handles_kinks_and_reports_failure() {
    let r = integrate_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-13, 100).unwrap();
    assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    let v = integrate_function(|x: f64| x.exp(), 0.0, 2.0, 1e-13).unwrap();
    assert!((v - (2f64.exp() - 1.0)).abs() < 1e-12);
    let cum = cumulative_integral(|x: f64| 2.0 * x, &[0.0, 1.0, 2.0, 3.0], 1e-13).unwrap();
    assert!(cum.iter().zip([0.0, 1.0, 4.0, 9.0]).all(|(a, b)| (a - b).abs() < 1e-12), "{cum:?}");
    let bad = integrate_with_breaks(|x: f64| (1.0 / x).sin() / x, 1e-9, 1.0, &[], 1e-14, 10);
    assert!(matches!(bad, Err(Error::SubdivisionLimit { .. })));
}

#[test]
fn root_finding_needs_a_bracket() {
    let r = find_root_bracketed(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
    assert!((r - 2f64.sqrt()).abs() < 1e-14);
    assert!(matches!(find_root_bracketed(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12), Err(Error::NoSignChange { .. })));
    let (x, fx) = golden_max(|x: f64| -(x - 0.7).powi(2) + 3.0, 0.0, 2.0, 1e-10);
    assert!((x - 0.7).abs() < 1e-6 && (fx - 3.0).abs() < 1e-12);
}

#[test]
fn line_fit_degenerate_abscissae() {
    assert!(matches!(fit_line(&[(1.0, 2.0), (1.0, 3.0)]), Err(Error::DegenerateAbscissae)));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn line_fit_is_exact_on_lines(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 3usize..50) {
        let pts: Vec<(f64, f64)> = (0..n).map(|i| (i as f64 * 0.37, a * i as f64 * 0.37 + b)).collect();
        let f = fit_line(&pts).unwrap();
        prop_assert!((f.slope - a).abs() < 1e-10 && (f.intercept - b).abs() < 1e-10 && f.rms_residual < 1e-10);
    }

    #[test]
    fn linear_systems_match_the_exponential(lambda in -3.0f64..1.0, x1 in 0.1f64..5.0) {
        let opts = IvpOptions::new(1e-12, 1e-14);
        let t = integrate_ivp(move |_x: f64, y: &[f64], dy: &mut [f64]| dy[0] = lambda * y[0], 0.0, x1, &[1.0], &opts).unwrap();
        let want = (lambda * x1).exp();
        prop_assert!((t.last_state()[0] - want).abs() < 1e-10 * want.max(1.0));
    }

    #[test]
    fn gauss_kronrod_integrates_polynomials(c in proptest::collection::vec(-3.0f64..3.0, 1..12), b in 0.1f64..4.0) {
        let p = |x: f64| c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
        let exact: f64 = c.iter().enumerate().map(|(i, ci)| ci * b.powi(i as i32 + 1) / (i as f64 + 1.0)).sum();
        let got = integrate_function(p, 0.0, b, 1e-13).unwrap();
        prop_assert!((got - exact).abs() < 1e-11 * (1.0 + exact.abs()) * b.powi(c.len() as i32).max(1.0));
    }
}
