//! Gaussian matrix mechanism: strategy extraction, noisy answering and error
//! evaluation.
//!
//! A strategy `A` is answered as `Ax + b` with `b ~ N(0, s²I)`,
//! `s = ‖A‖_{2,∞}·√(2 ln(2/δ))/ε`, and the workload answers are recovered as
//! `W(x + A†b)`. The expected total squared error is `s²·‖WA†‖_F²`, which for
//! `X = AᵀA` with unit diagonal is `(2 ln(2/δ)/ε²)·tr(WX⁻¹Wᵀ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, DenseMatrix};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
    delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `h(ε, δ) = ε/√(2 ln(2/δ))`; the noise standard deviation is
    /// sensitivity divided by `h`.
    pub fn h(&self) -> f64 {
        self.epsilon / (2.0 * (2.0 / self.delta).ln()).sqrt()
    }

    /// Noise standard deviation per unit of ℓ2 sensitivity.
    pub fn noise_multiplier(&self) -> f64 {
        (2.0 * (2.0 / self.delta).ln()).sqrt() / self.epsilon
    }

    /// Variance per unit sensitivity, `2 ln(2/δ)/ε²`.
    pub fn error_factor(&self) -> f64 {
        let s = self.noise_multiplier();
        s * s
    }
}

#[derive(Clone, Debug)]
pub struct StrategyMatrix {
    a: DenseMatrix,
    col_norm_max: f64,
}

impl StrategyMatrix {
    /// Uses `a` as given; `‖A‖_{2,∞}` is measured, not assumed.
    pub fn new(a: DenseMatrix) -> Result<Self> {
        let col_norm_max = a.max_column_norm();
        if col_norm_max == 0.0 {
            return Err(Error::ZeroStrategy);
        }
        Ok(Self { a, col_norm_max })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn col_norm_max(&self) -> f64 {
        self.col_norm_max
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// `AᵀA`.
    pub fn gram(&self) -> DenseMatrix {
        let mut x = self.a.tr_matmul(&self.a);
        x.symmetrize();
        x
    }
}

/// Upper-triangular `A = Lᵀ` with `AᵀA = X`.
pub fn extract_strategy(x: &DenseMatrix) -> Result<StrategyMatrix> {
    let chol = cholesky(x)?;
    StrategyMatrix::new(chol.lower().transpose())
}

/// `A / ‖A‖_{2,∞}`, which has unit sensitivity and the same expected error.
pub fn normalize_strategy(a: &DenseMatrix) -> Result<StrategyMatrix> {
    let norm = a.max_column_norm();
    if norm == 0.0 {
        return Err(Error::ZeroStrategy);
    }
    StrategyMatrix::new(a.scaled(1.0 / norm))
}

/// `‖A‖_{2,∞}·√(2 ln(2/δ))/ε`.
pub fn noise_scale(a: &StrategyMatrix, pp: &PrivacyParams) -> f64 {
    a.col_norm_max * pp.noise_multiplier()
}

/// The mechanism for one workload/strategy pair, with `W·A†` precomputed.
#[derive(Clone, Debug)]
pub struct GaussianMechanism {
    workload: DenseMatrix,
    scale: f64,
    reconstruction: DenseMatrix,
}

impl GaussianMechanism {
    /// `A` must have as many columns as `W` and full column rank, so that
    /// `A† = (AᵀA)⁻¹Aᵀ`.
    pub fn new(w: &DenseMatrix, a: &StrategyMatrix, pp: &PrivacyParams) -> Result<Self> {
        if a.cols() != w.cols() {
            return Err(Error::DimensionMismatch(format!(
                "workload has {} columns, strategy has {}",
                w.cols(),
                a.cols()
            )));
        }
        let gram_inv = cholesky(&a.gram())?.inverse();
        let reconstruction = w.matmul(&gram_inv).matmul_tr(a.matrix());
        Ok(Self {
            workload: w.clone(),
            scale: noise_scale(a, pp),
            reconstruction,
        })
    }

    pub fn noise_scale(&self) -> f64 {
        self.scale
    }

    /// `W·A†`, mapping strategy noise to workload noise.
    pub fn reconstruction(&self) -> &DenseMatrix {
        &self.reconstruction
    }

    /// Answers with a caller-supplied strategy noise vector `b`.
    pub fn answer_with_noise(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.reconstruction.cols(), "noise length");
        let mut out = self.workload.matvec(x);
        for (o, e) in out.iter_mut().zip(self.reconstruction.matvec(b)) {
            *o += e;
        }
        out
    }

    pub fn answer(&self, x: &[f64], rng: &mut Rng) -> Vec<f64> {
        let b = rng.normal_vec(self.reconstruction.cols(), self.scale);
        self.answer_with_noise(x, &b)
    }

    /// `s²·‖WA†‖_F²`.
    pub fn expected_error(&self) -> f64 {
        let r = self.reconstruction.as_slice();
        self.scale * self.scale * dot(r, r)
    }
}

/// `W(x + A†b)` with fresh Gaussian noise from `rng`.
pub fn answer_queries(
    w: &DenseMatrix,
    a: &StrategyMatrix,
    x: &[f64],
    pp: &PrivacyParams,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    Ok(GaussianMechanism::new(w, a, pp)?.answer(x, rng))
}

/// Expected total squared error of the strategy with Gram matrix `x`:
/// `max(diag X)·(2 ln(2/δ)/ε²)·tr(WX⁻¹Wᵀ)`.
pub fn expected_error(w: &DenseMatrix, x: &DenseMatrix, pp: &PrivacyParams) -> Result<f64> {
    if x.rows() != w.cols() {
        return Err(Error::DimensionMismatch(format!(
            "workload has {} columns, X is {}x{}",
            w.cols(),
            x.rows(),
            x.cols()
        )));
    }
    let chol = cholesky(x)?;
    // tr(W X⁻¹ Wᵀ) = ‖W L⁻ᵀ‖_F²
    let wl = w.matmul_tr(&chol.lower_inverse());
    let sensitivity_sq = x.diagonal().into_iter().fold(0.0, f64::max);
    let r = wl.as_slice();
    Ok(pp.error_factor() * sensitivity_sq * dot(r, r))
}

/// Error of answering `W` directly: `(2 ln(2/δ)/ε²)·‖W‖_F²`.
pub fn gm_baseline(w: &DenseMatrix, pp: &PrivacyParams) -> f64 {
    let r = w.as_slice();
    pp.error_factor() * dot(r, r)
}

/// Mean of `‖answer − Wx‖²` over `trials` runs and its standard error.
pub fn empirical_error(
    mech: &GaussianMechanism,
    x: &[f64],
    trials: usize,
    rng: &mut Rng,
) -> (f64, f64) {
    assert!(trials >= 1, "at least one trial");
    let exact = mech.workload.matvec(x);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for t in 0..trials {
        let noisy = mech.answer(x, rng);
        let err: f64 = noisy
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        // Welford
        let k = (t + 1) as f64;
        let d = err - mean;
        mean += d / k;
        m2 += d * (err - mean);
    }
    let std_error = if trials > 1 {
        (m2 / (trials - 1) as f64).sqrt() / (trials as f64).sqrt()
    } else {
        0.0
    };
    (mean, std_error)
}

/// Synthetic unit counts, i.i.d. uniform integers in `[0, 1000]`.
pub fn synthetic_data(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| rng.next_below(1001) as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub m: usize,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Expected total squared error over all queries.
    pub analytic_expected_error: f64,
    pub analytic_per_query: f64,
    pub empirical_mean_error: f64,
    pub empirical_std_error: f64,
    pub empirical_per_query: f64,
    pub trials: usize,
    pub gm_baseline_error: f64,
    pub ratio_vs_gm: f64,
    pub seed: u64,
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str = "family,m,n,analytic,empirical,gm_baseline,ratio";

    pub fn csv_row(&self, family: &str) -> String {
        format!(
            "{family},{},{},{},{},{},{}",
            self.m,
            self.n,
            self.analytic_expected_error,
            self.empirical_mean_error,
            self.gm_baseline_error,
            self.ratio_vs_gm
        )
    }
}

/// Analytic and Monte-Carlo errors of `strategy` on `w`, against the plain
/// Gaussian mechanism. The data vector is drawn from the same seed.
pub fn evaluate(
    w: &DenseMatrix,
    strategy: &StrategyMatrix,
    pp: &PrivacyParams,
    trials: usize,
    seed: u64,
) -> Result<ErrorReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let mech = GaussianMechanism::new(w, strategy, pp)?;
    let mut rng = Rng::new(seed);
    let x = synthetic_data(w.cols(), &mut rng);
    let (mean, std_error) = empirical_error(&mech, &x, trials, &mut rng);
    let analytic = mech.expected_error();
    let baseline = gm_baseline(w, pp);
    let m = w.rows() as f64;
    Ok(ErrorReport {
        m: w.rows(),
        n: w.cols(),
        epsilon: pp.epsilon(),
        delta: pp.delta(),
        analytic_expected_error: analytic,
        analytic_per_query: analytic / m,
        empirical_mean_error: mean,
        empirical_std_error: std_error,
        empirical_per_query: mean / m,
        trials,
        gm_baseline_error: baseline,
        ratio_vs_gm: analytic / baseline,
        seed,
    })
}
