//! Newton direction by projected conjugate gradients.
//!
//! The direction minimizes the quadratic model
//! `f(Δ) = ⟨Δ, G⟩ + ½ vec(Δ)ᵀ H vec(Δ)` subject to `diag(Δ) = 0`. The
//! constraint set is a coordinate subspace, so zeroing the diagonal of every
//! iterate and residual is an exact projection and plain CG applies.

use crate::linalg::DenseMatrix;
use crate::objective::hess_vec;

/// Default number of CG iterations per Newton step.
pub const DEFAULT_CG_ITERS: usize = 5;
/// Default early-exit threshold on `⟨R, R⟩`.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DirectionResult {
    pub direction: DenseMatrix,
    pub cg_iterations: usize,
    pub final_residual_sq: f64,
}

/// Runs at most `max_iters` CG steps from `D = 0`, stopping early once the
/// squared residual norm falls below `residual_tol`. `x_inv` and `g` must
/// belong to the same iterate.
pub fn solve_direction(
    x_inv: &DenseMatrix,
    g: &DenseMatrix,
    max_iters: usize,
    residual_tol: f64,
) -> DirectionResult {
    let n = g.rows();
    let mut d = DenseMatrix::zeros(n, n);

    // R = −G − H(0) = −G
    let mut r = g.scaled(-1.0);
    r.zero_diagonal();
    let mut rs_old = r.inner(&r);
    let mut p = r.clone();
    let mut iterations = 0;

    if rs_old < residual_tol {
        return DirectionResult {
            direction: d,
            cg_iterations: 0,
            final_residual_sq: rs_old,
        };
    }

    for it in 1..=max_iters {
        let hp = hess_vec(g, x_inv, &p);
        let curvature = p.inner(&hp);
        // H is positive definite; a nonpositive curvature is rounding noise
        if !(curvature > 0.0) {
            break;
        }
        let alpha = rs_old / curvature;
        d.axpy(alpha, &p);
        d.zero_diagonal();
        r.axpy(-alpha, &hp);
        r.zero_diagonal();
        iterations = it;

        let rs_new = r.inner(&r);
        if rs_new < residual_tol {
            rs_old = rs_new;
            break;
        }
        let beta = rs_new / rs_old;
        p.scale_mut(beta);
        p.axpy(1.0, &r);
        rs_old = rs_new;
    }

    DirectionResult {
        direction: d,
        cg_iterations: iterations,
        final_residual_sq: rs_old,
    }
}

/// Value of the quadratic model `⟨Δ, G⟩ + ½⟨Δ, H(Δ)⟩`.
pub fn model_value(x_inv: &DenseMatrix, g: &DenseMatrix, delta: &DenseMatrix) -> f64 {
    delta.inner(g) + 0.5 * delta.inner(&hess_vec(g, x_inv, delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_problem_has_no_free_entries() {
        let res = solve_direction(
            &DenseMatrix::identity(1),
            &DenseMatrix::from_rows(&[[-3.0]]),
            5,
            DEFAULT_RESIDUAL_TOL,
        );
        assert_eq!(res.direction, DenseMatrix::zeros(1, 1));
        assert_eq!(res.cg_iterations, 0);
    }

    #[test]
    fn two_by_two_at_identity() {
        // minimize −2d + 4d² ⇒ d = 1/4
        let g = DenseMatrix::from_rows(&[[-2.0, -1.0], [-1.0, -2.0]]);
        let res = solve_direction(&DenseMatrix::identity(2), &g, 5, DEFAULT_RESIDUAL_TOL);
        let expected = DenseMatrix::from_rows(&[[0.0, 0.25], [0.25, 0.0]]);
        assert!(res.direction.sub(&expected).max_abs() < 1e-14);
        assert_eq!(res.cg_iterations, 1);
        assert!(model_value(&DenseMatrix::identity(2), &g, &res.direction) < 0.0);
    }

    #[test]
    fn diagonal_gradient_gives_zero_direction() {
        let g = DenseMatrix::identity(3).scaled(-1.0);
        let res = solve_direction(&DenseMatrix::identity(3), &g, 5, DEFAULT_RESIDUAL_TOL);
        assert_eq!(res.direction.max_abs(), 0.0);
    }
}
