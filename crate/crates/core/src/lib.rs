//! Strategy optimization for answering batches of linear counting queries
//! under (ε, δ)-differential privacy with the Gaussian mechanism.
//!
//! Given a workload `W`, the solver minimizes `⟨X⁻¹, V⟩` with
//! `V = WᵀW + θ·I` over positive definite `X` with unit diagonal, using a
//! Newton-type method whose directions come from projected conjugate
//! gradients. The optimal strategy is any `A` with `AᵀA = X`.
//!
//! ```
//! use dpopt_core::{build_gram, solve, DenseMatrix, ScalingMode, SolverConfig};
//!
//! let w = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
//! let v = build_gram(&w, 0.0, ScalingMode::Raw).unwrap();
//! let sol = solve(&v, &SolverConfig::default()).unwrap();
//! assert!((sol.objective - (2.0 + 3f64.sqrt())).abs() < 1e-6);
//! ```

// negated comparisons are deliberate: NaN must fail every validity check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coa;
pub mod error;
pub mod homotopy;
pub mod linalg;
pub mod mechanism;
pub mod newton_cg;
pub mod objective;
pub mod rng;
pub mod workloads;

pub use coa::{
    first_iteration_direction, initial_iterate, line_search, solve, solve_from, ConvergenceTrace,
    Iterate, IterationRecord, LineSearchOutcome, Solution, SolverConfig, TerminationReason,
};
pub use error::{Error, Result};
pub use homotopy::{homotopy_solve, HomotopyResult, HomotopySchedule, StageResult};
pub use linalg::{chol_inverse, cholesky, sym_eigen, CholeskyFactor, DenseMatrix, SymEigen};
pub use mechanism::{
    answer_queries, empirical_error, evaluate, expected_error, extract_strategy, gm_baseline,
    noise_scale, normalize_strategy, ErrorReport, GaussianMechanism, PrivacyParams, StrategyMatrix,
};
pub use newton_cg::{model_value, solve_direction, DirectionResult};
pub use objective::{
    build_gram, eval_gradient, eval_objective, hess_vec, level_set_constants, objective_bounds,
    BoundsReport, GramMatrix, LevelSetConstants, ScalingMode,
};
pub use rng::Rng;
pub use workloads::{
    gen_wdiscrete, gen_wmarginal, gen_wrange, gen_wrelated, load_workload, save_workload,
    WorkloadFamily, WorkloadMatrix, WorkloadSpec,
};
