//! The strategy-search objective `F(X) = ⟨X⁻¹, V⟩` and its derivatives.
//!
//! `V` is the regularized Gram matrix of the workload. The gradient is
//! `G = −X⁻¹VX⁻¹` and the Hessian is `H = −G ⊗ X⁻¹ − X⁻¹ ⊗ G`; it is only
//! ever applied to a matrix, never formed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, sym_eigen, DenseMatrix};

/// How `θ` is scaled before it is added to the diagonal of `WᵀW`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingMode {
    /// `V = WᵀW + θ·I`.
    Raw,
    /// `V = WᵀW + θ·mean(diag(WᵀW))·I`.
    #[default]
    MeanDiag,
}

impl std::str::FromStr for ScalingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Self::Raw),
            "meandiag" | "mean-diag" | "mean_diag" => Ok(Self::MeanDiag),
            other => Err(Error::InvalidParameter(format!(
                "unknown scaling mode {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GramMatrix {
    v: DenseMatrix,
    theta: f64,
    scaling: ScalingMode,
    ridge: f64,
}

impl GramMatrix {
    /// Wraps an already regularized symmetric matrix, checking positive
    /// definiteness.
    pub fn from_matrix(v: DenseMatrix) -> Result<Self> {
        if !v.is_symmetric(1e-12) {
            return Err(Error::InvalidParameter(
                "Gram matrix is not symmetric".into(),
            ));
        }
        cholesky(&v)?;
        Ok(Self {
            v,
            theta: 0.0,
            scaling: ScalingMode::Raw,
            ridge: 0.0,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.rows()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn scaling(&self) -> ScalingMode {
        self.scaling
    }

    /// The multiple of the identity actually added to `WᵀW`.
    pub fn ridge(&self) -> f64 {
        self.ridge
    }
}

/// `V = WᵀW + ridge·I` with the ridge chosen by `mode`.
///
/// Fails with `NotPositiveDefinite` when the result cannot be factored, which
/// happens for `θ = 0` and a rank-deficient `W`.
pub fn build_gram(w: &DenseMatrix, theta: f64, mode: ScalingMode) -> Result<GramMatrix> {
    if w.rows() == 0 || w.cols() == 0 {
        return Err(Error::InvalidParameter("empty workload".into()));
    }
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "theta must be >= 0, got {theta}"
        )));
    }
    let mut v = w.tr_matmul(w);
    v.symmetrize();
    let ridge = match mode {
        ScalingMode::Raw => theta,
        ScalingMode::MeanDiag => theta * v.trace() / v.rows() as f64,
    };
    v.add_to_diagonal(ridge);
    cholesky(&v)?;
    Ok(GramMatrix {
        v,
        theta,
        scaling: mode,
        ridge,
    })
}

/// `F(X) = ⟨X⁻¹, V⟩`.
pub fn eval_objective(x_inv: &DenseMatrix, v: &GramMatrix) -> f64 {
    x_inv.inner(&v.v)
}

/// `G(X) = −X⁻¹VX⁻¹`, symmetric.
pub fn eval_gradient(x_inv: &DenseMatrix, v: &GramMatrix) -> DenseMatrix {
    let mut g = x_inv.matmul(&v.v).matmul(x_inv);
    g.scale_mut(-1.0);
    g.symmetrize();
    g
}

/// Hessian applied to `d`: `−G·D·X⁻¹ − X⁻¹·D·G`.
///
/// For symmetric `d` the second term is the transpose of the first, so only
/// two products are formed and the result is exactly symmetric.
pub fn hess_vec(g: &DenseMatrix, x_inv: &DenseMatrix, d: &DenseMatrix) -> DenseMatrix {
    let gdz = g.matmul(d).matmul(x_inv);
    let n = gdz.rows();
    if d.asymmetry() == 0.0 {
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = -(gdz[(i, j)] + gdz[(j, i)]);
            }
        }
        out
    } else {
        let zdg = x_inv.matmul(d).matmul(g);
        let mut out = gdz;
        out.axpy(1.0, &zdg);
        out.scale_mut(-1.0);
        out
    }
}

/// Analytic bounds on the optimal objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub nuclear_norm: f64,
    pub rho: f64,
}

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-8;

/// Sandwich bounds `max(2‖W‖_* − n, ‖W‖_*²/n) + θ ≤ F* ≤ ρ²(‖W‖_F² + θn)`.
///
/// The singular values and right singular vectors come from the
/// eigendecomposition of `WᵀW`; `ρ` is the largest column norm of the right
/// singular vectors spanning the row space of `W`. `theta` is the ridge
/// actually added to `WᵀW`.
pub fn objective_bounds(w: &DenseMatrix, theta: f64) -> BoundsReport {
    let n = w.cols();
    let eig = sym_eigen(&w.tr_matmul(w));
    let sv: Vec<f64> = eig.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    let sv_max = sv.iter().copied().fold(0.0, f64::max);
    let nuclear_norm: f64 = sv.iter().sum();

    let kept: Vec<usize> = (0..n).filter(|&k| sv[k] > RANK_TOL * sv_max).collect();
    let rho = (0..n)
        .map(|i| {
            kept.iter()
                .map(|&k| eig.vectors[(i, k)].powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);

    let nf = n as f64;
    let fro_sq = w.frobenius().powi(2);
    BoundsReport {
        lower: (2.0 * nuclear_norm - nf).max(nuclear_norm * nuclear_norm / nf) + theta,
        upper: rho * rho * (fro_sq + theta * nf),
        nuclear_norm,
        rho,
    }
}

/// Eigenvalue bounds that hold on the level set `{X : F(X) ≤ F(X⁰)}`:
/// `C1·I ⪯ X ⪯ C2·I`, `C3·I ⪯ H ⪯ C4·I`, and `C5`, `C6` bounding the
/// magnitude of the gradient's eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

/// `f0` must be the objective at the solver's actual starting point.
pub fn level_set_constants(v: &GramMatrix, f0: f64, n: usize) -> LevelSetConstants {
    let eig = sym_eigen(v.matrix());
    let lambda_min = eig.values[0];
    let lambda_max = eig.values[eig.values.len() - 1];
    let nf = n as f64;
    let c1 = 1.0 / (f0 / lambda_min - 1.0 + 1.0 / nf);
    let c2 = nf;
    LevelSetConstants {
        c1,
        c2,
        c3: lambda_min / c2.powi(3),
        c4: lambda_max / c1.powi(3),
        c5: lambda_min / c2.powi(2),
        c6: lambda_max / c1.powi(2),
    }
}
