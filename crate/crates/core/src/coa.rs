//! Outer Newton loop over unit-diagonal positive definite matrices.
//!
//! Each iteration computes a direction with zero diagonal (projected steepest
//! descent on the first step of a cold start, projected Newton-CG afterwards),
//! then backtracks `α = βᵗ` until `X + αD` factors and satisfies
//! `F(X + αD) ≤ F(X) + ασ⟨G, D⟩`. The accepted factor is kept and reused for
//! `X⁻¹`, `G` and `F`.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, CholeskyFactor, DenseMatrix};
use crate::newton_cg::{solve_direction, DEFAULT_CG_ITERS, DEFAULT_RESIDUAL_TOL};
use crate::objective::{eval_gradient, eval_objective, GramMatrix, ScalingMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub theta: f64,
    pub scaling: ScalingMode,
    pub max_outer: usize,
    pub max_linesearch: usize,
    pub cg_iters: usize,
    pub cg_residual_tol: f64,
    /// Backtracking factor, in `(0, 1)`.
    pub beta: f64,
    /// Sufficient-decrease constant, in `(0, 0.5)`.
    pub sigma: f64,
    pub rel_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            theta: 1e-3,
            scaling: ScalingMode::MeanDiag,
            max_outer: 30,
            max_linesearch: 50,
            cg_iters: DEFAULT_CG_ITERS,
            cg_residual_tol: DEFAULT_RESIDUAL_TOL,
            beta: 0.5,
            sigma: 1e-4,
            rel_tol: 1e-5,
        }
    }
}

impl SolverConfig {
    /// The coarser Armijo schedule `β = 0.1`, `σ = 0.25`.
    pub fn with_coarse_armijo(mut self) -> Self {
        self.beta = 0.1;
        self.sigma = 0.25;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return fail(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return fail(format!("sigma must lie in (0, 0.5), got {}", self.sigma));
        }
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return fail(format!("theta must be >= 0, got {}", self.theta));
        }
        if self.max_outer == 0 || self.max_linesearch == 0 || self.cg_iters == 0 {
            return fail("iteration limits must be at least 1".into());
        }
        if !(self.rel_tol >= 0.0) {
            return fail(format!("rel_tol must be >= 0, got {}", self.rel_tol));
        }
        Ok(())
    }
}

/// A feasible point with everything the next step needs.
#[derive(Clone, Debug)]
pub struct Iterate {
    pub x: DenseMatrix,
    pub chol: CholeskyFactor,
    pub x_inv: DenseMatrix,
    pub g: DenseMatrix,
    pub f: f64,
}

impl Iterate {
    /// Factors `x` and evaluates the objective and gradient. Rejects points
    /// without a unit diagonal.
    pub fn new(x: DenseMatrix, v: &GramMatrix) -> Result<Self> {
        if x.rows() != v.dim() || !x.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "start point is {}x{}, Gram matrix is {}x{}",
                x.rows(),
                x.cols(),
                v.dim(),
                v.dim()
            )));
        }
        if x.diagonal().iter().any(|&d| d != 1.0) {
            return Err(Error::InvalidParameter(
                "start point must have a unit diagonal".into(),
            ));
        }
        let chol = cholesky(&x)?;
        Ok(Self::from_factor(x, chol, v))
    }

    fn from_factor(x: DenseMatrix, chol: CholeskyFactor, v: &GramMatrix) -> Self {
        let x_inv = chol.inverse();
        let f = eval_objective(&x_inv, v);
        let g = eval_gradient(&x_inv, v);
        Self {
            x,
            chol,
            x_inv,
            g,
            f,
        }
    }
}

/// `X⁰ = I`, so `F = tr(V)` and `G = −V`.
pub fn initial_iterate(v: &GramMatrix) -> Iterate {
    let n = v.dim();
    let x = DenseMatrix::identity(n);
    let chol = cholesky(&x).expect("identity is positive definite");
    Iterate::from_factor(x, chol, v)
}

/// Projected steepest descent: `−G` with the diagonal zeroed.
pub fn first_iteration_direction(g: &DenseMatrix) -> DenseMatrix {
    let mut d = g.scaled(-1.0);
    d.zero_diagonal();
    d
}

#[derive(Clone, Debug)]
pub enum LineSearchOutcome {
    Accepted {
        alpha: f64,
        trials: usize,
        next: Iterate,
    },
    Exhausted {
        trials: usize,
    },
}

/// Backtracking over `α ∈ {1, β, β², …}` for at most `max_linesearch` trials.
///
/// A trial is accepted when `X + αD` passes the Cholesky test and the
/// sufficient-decrease condition holds.
pub fn line_search(
    it: &Iterate,
    d: &DenseMatrix,
    v: &GramMatrix,
    cfg: &SolverConfig,
) -> LineSearchOutcome {
    let slope = it.g.inner(d);
    let mut alpha = 1.0;
    for trial in 1..=cfg.max_linesearch {
        let mut x = it.x.add_scaled(alpha, d);
        x.symmetrize();
        if let Ok(chol) = cholesky(&x) {
            let x_inv = chol.inverse();
            let f = eval_objective(&x_inv, v);
            if f <= it.f + alpha * cfg.sigma * slope {
                let g = eval_gradient(&x_inv, v);
                return LineSearchOutcome::Accepted {
                    alpha,
                    trials: trial,
                    next: Iterate {
                        x,
                        chol,
                        x_inv,
                        g,
                        f,
                    },
                };
            }
        }
        alpha *= cfg.beta;
    }
    LineSearchOutcome::Exhausted {
        trials: cfg.max_linesearch,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    RelTolReached,
    MaxIterations,
    LineSearchExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective: f64,
    pub direction_norm: f64,
    pub step_size: f64,
    pub cg_iterations: usize,
    pub linesearch_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub initial_objective: f64,
    pub iterations: Vec<IterationRecord>,
    pub termination: TerminationReason,
    pub wall_clock_ms: f64,
}

impl ConvergenceTrace {
    pub fn final_objective(&self) -> f64 {
        self.iterations
            .last()
            .map_or(self.initial_objective, |r| r.objective)
    }

    pub fn outer_iterations(&self) -> usize {
        self.iterations.len()
    }

    /// The objective column including the starting value.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.iterations.iter().map(|r| r.objective))
            .collect()
    }

    /// True when every objective is at most its predecessor plus
    /// `slack·|predecessor|`.
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.objectives()
            .windows(2)
            .all(|w| w[1] <= w[0] + slack * w[0].abs())
    }

    /// Flat CSV `iter,F,dnorm,alpha,cg_iters,ls_trials`; row 0 is the start point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,F,dnorm,alpha,cg_iters,ls_trials")?;
        writeln!(w, "0,{},0,0,0,0", self.initial_objective)?;
        for r in &self.iterations {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.iter,
                r.objective,
                r.direction_norm,
                r.step_size,
                r.cg_iterations,
                r.linesearch_trials
            )?;
        }
        Ok(())
    }

    /// One JSON object with the configuration echoed next to the trace.
    pub fn to_json<C: Serialize>(&self, config: &C) -> serde_json::Value {
        serde_json::json!({
            "config": config,
            "initial_objective": self.initial_objective,
            "iterations": self.iterations,
            "termination": self.termination,
            "wall_clock_ms": self.wall_clock_ms,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: DenseMatrix,
    pub objective: f64,
    pub trace: ConvergenceTrace,
}

/// Cold start from `X⁰ = I`; the first step is projected steepest descent.
pub fn solve(v: &GramMatrix, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    cholesky(v.matrix()).map_err(|_| Error::InfeasibleGram)?;
    run(initial_iterate(v), v, cfg, true)
}

/// Warm start from a feasible `x0` (unit diagonal, positive definite); every
/// step uses Newton-CG.
pub fn solve_from(v: &GramMatrix, x0: DenseMatrix, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    cholesky(v.matrix()).map_err(|_| Error::InfeasibleGram)?;
    let start = Iterate::new(x0, v)?;
    run(start, v, cfg, false)
}

fn run(
    mut it: Iterate,
    v: &GramMatrix,
    cfg: &SolverConfig,
    steepest_first: bool,
) -> Result<Solution> {
    let started = Instant::now();
    let initial_objective = it.f;
    let mut records = Vec::new();
    let mut termination = TerminationReason::MaxIterations;

    for iter in 1..=cfg.max_outer {
        let (mut d, cg_iterations) = if iter == 1 && steepest_first {
            (first_iteration_direction(&it.g), 0)
        } else {
            let res = solve_direction(&it.x_inv, &it.g, cfg.cg_iters, cfg.cg_residual_tol);
            (res.direction, res.cg_iterations)
        };
        d.symmetrize();
        let direction_norm = d.frobenius();

        match line_search(&it, &d, v, cfg) {
            LineSearchOutcome::Accepted {
                alpha,
                trials,
                next,
            } => {
                let previous = it.f;
                it = next;
                records.push(IterationRecord {
                    iter,
                    objective: it.f,
                    direction_norm,
                    step_size: alpha,
                    cg_iterations,
                    linesearch_trials: trials,
                });
                if ((previous - it.f) / previous).abs() <= cfg.rel_tol {
                    termination = TerminationReason::RelTolReached;
                    break;
                }
            }
            LineSearchOutcome::Exhausted { trials } => {
                records.push(IterationRecord {
                    iter,
                    objective: it.f,
                    direction_norm,
                    step_size: 0.0,
                    cg_iterations,
                    linesearch_trials: trials,
                });
                termination = TerminationReason::LineSearchExhausted;
                break;
            }
        }
    }

    let trace = ConvergenceTrace {
        initial_objective,
        iterations: records,
        termination,
        wall_clock_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Solution {
        objective: it.f,
        x: it.x,
        trace,
    })
}
