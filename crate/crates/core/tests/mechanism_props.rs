mod common;

use dpopt_core::mechanism::synthetic_data;
use dpopt_core::{
    build_gram, empirical_error, expected_error, extract_strategy, gm_baseline, noise_scale,
    normalize_strategy, solve, DenseMatrix, GaussianMechanism, PrivacyParams, Rng, ScalingMode,
    SolverConfig, StrategyMatrix,
};

fn default_privacy() -> PrivacyParams {
    PrivacyParams::new(0.1, 1e-4).unwrap()
}

/// Expected error written directly from the strategy: `σ²·‖W A⁻¹‖_F²` for
/// square invertible `A`.
fn error_from_strategy(w: &DenseMatrix, a: &DenseMatrix, pp: &PrivacyParams) -> f64 {
    let s = StrategyMatrix::new(a.clone()).unwrap();
    let sigma = noise_scale(&s, pp);
    let mech = GaussianMechanism::new(w, &s, pp).unwrap();
    let r = mech.reconstruction();
    sigma * sigma * r.inner(r)
}

#[test]
fn error_is_invariant_to_strategy_scaling() {
    let mut rng = Rng::new(61);
    let pp = default_privacy();
    for trial in 0..20 {
        let n = 2 + trial % 8;
        let w = common::gaussian(n + 2, n, &mut rng);
        let a = common::random_spd(n, 0.5, &mut rng);
        let base = error_from_strategy(&w, &a, &pp);
        let c = 0.1 + 10.0 * rng.next_f64();
        let scaled = error_from_strategy(&w, &a.scaled(c), &pp);
        assert!((scaled - base).abs() <= 1e-10 * base);
        let normalized = normalize_strategy(&a).unwrap();
        let norm_err = error_from_strategy(&w, normalized.matrix(), &pp);
        assert!((norm_err - base).abs() <= 1e-10 * base);
    }
}

#[test]
fn monte_carlo_agrees_with_the_analytic_error() {
    let mut rng = Rng::new(62);
    let pp = default_privacy();
    for trial in 0..20 {
        let n = 4 + trial % 6;
        let w = common::gaussian(2 * n, n, &mut rng);
        let x = common::random_correlation(n, &mut rng);
        let s = extract_strategy(&x).unwrap();
        let mech = GaussianMechanism::new(&w, &s, &pp).unwrap();
        let analytic = expected_error(&w, &x, &pp).unwrap();
        assert!((mech.expected_error() - analytic).abs() <= 1e-10 * analytic);
        let data = synthetic_data(n, &mut rng);
        let (mean, se) = empirical_error(&mech, &data, 4000, &mut rng);
        assert!(
            (mean - analytic).abs() < 3.0 * se + 1e-9 * analytic,
            "trial {trial}"
        );
    }
}

#[test]
fn empirical_error_does_not_depend_on_the_data() {
    let mut rng = Rng::new(63);
    let pp = default_privacy();
    let w = common::gaussian(12, 6, &mut rng);
    let x = common::random_correlation(6, &mut rng);
    let mech = GaussianMechanism::new(&w, &extract_strategy(&x).unwrap(), &pp).unwrap();
    let zeros = vec![0.0; 6];
    let counts = synthetic_data(6, &mut rng);
    let (m1, s1) = empirical_error(&mech, &zeros, 20_000, &mut Rng::new(1));
    let (m2, s2) = empirical_error(&mech, &counts, 20_000, &mut Rng::new(2));
    assert!((m1 - m2).abs() < 3.0 * (s1 * s1 + s2 * s2).sqrt());
}

#[test]
fn identity_strategy_is_the_baseline_and_optimization_helps() {
    let mut rng = Rng::new(64);
    let pp = default_privacy();
    for trial in 0..8 {
        let n = 3 + 4 * trial;
        let w = common::gaussian(2 * n, n, &mut rng);
        assert_eq!(
            expected_error(&w, &DenseMatrix::identity(n), &pp).unwrap(),
            gm_baseline(&w, &pp)
        );
        let v = build_gram(&w, 1e-3, ScalingMode::MeanDiag).unwrap();
        let sol = solve(&v, &SolverConfig::default()).unwrap();
        let ratio = expected_error(&w, &sol.x, &pp).unwrap() / gm_baseline(&w, &pp);
        assert!(ratio <= 1.0, "trial {trial}: {ratio}");
    }
}

#[test]
fn two_by_two_optimum_error() {
    let w = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
    let pp = default_privacy();
    let v = build_gram(&w, 0.0, ScalingMode::Raw).unwrap();
    let sol = solve(&v, &SolverConfig::default()).unwrap();
    let err = expected_error(&w, &sol.x, &pp).unwrap();
    let expected = pp.error_factor() * (2.0 + 3f64.sqrt());
    assert!((err - expected).abs() <= 1e-6 * expected);
}
