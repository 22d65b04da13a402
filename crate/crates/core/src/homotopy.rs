//! Continuation over a decreasing regularization sequence.
//!
//! Stage `i` solves with `V = WᵀW + θᵢ·I`, `θᵢ = θ₀·decayⁱ`, starting from the
//! previous stage's optimum. The constraint set does not depend on `θ`, so every
//! warm start is feasible.

use serde::{Deserialize, Serialize};

use crate::coa::{solve, solve_from, ConvergenceTrace, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::objective::{build_gram, ScalingMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HomotopySchedule {
    pub theta0: f64,
    pub decay: f64,
    pub stages: usize,
    pub theta_min: f64,
}

impl Default for HomotopySchedule {
    fn default() -> Self {
        Self {
            theta0: 1.0,
            decay: 0.1,
            stages: 10,
            theta_min: 1e-10,
        }
    }
}

impl HomotopySchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta0 > 0.0) || !self.theta0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "theta0 must be > 0, got {}",
                self.theta0
            )));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "decay must lie in (0, 1), got {}",
                self.decay
            )));
        }
        Ok(())
    }

    /// The `θ` of every stage that will run: indices `0..=k` where `k` is the
    /// smaller of `stages` and the first index reaching `theta_min`.
    pub fn thetas(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..=self.stages {
            let theta = self.theta0 * self.decay.powi(i as i32);
            out.push(theta);
            // tolerate the rounding in decayⁱ so 1·0.1¹⁰ counts as 1e-10
            if theta <= self.theta_min * (1.0 + 1e-9) {
                break;
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct StageResult {
    pub theta: f64,
    pub objective: f64,
    pub trace: ConvergenceTrace,
}

#[derive(Clone, Debug)]
pub struct HomotopyResult {
    pub x: DenseMatrix,
    pub stages: Vec<StageResult>,
}

impl HomotopyResult {
    pub fn final_theta(&self) -> f64 {
        self.stages.last().map_or(0.0, |s| s.theta)
    }

    pub fn final_objective(&self) -> f64 {
        self.stages.last().map_or(f64::NAN, |s| s.objective)
    }

    /// Stage-tagged traces as one JSON object.
    pub fn to_json<C: Serialize>(&self, config: &C) -> serde_json::Value {
        let stages: Vec<_> = self
            .stages
            .iter()
            .enumerate()
            .map(|(i, s)| {
                serde_json::json!({
                    "stage": i,
                    "theta": s.theta,
                    "trace": s.trace.to_json(&serde_json::Value::Null),
                })
            })
            .collect();
        serde_json::json!({ "config": config, "stages": stages })
    }

    /// CSV with `stage,theta` prepended to the per-iteration columns.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "stage,theta,iter,F,dnorm,alpha,cg_iters,ls_trials")?;
        for (i, s) in self.stages.iter().enumerate() {
            let mut buf = Vec::new();
            s.trace.write_csv(&mut buf)?;
            let text = String::from_utf8_lossy(&buf);
            for line in text.lines().skip(1) {
                writeln!(w, "{i},{},{line}", s.theta)?;
            }
        }
        Ok(())
    }
}

/// Runs every stage of `sched`. `cfg`'s own `theta` and scaling are ignored;
/// stages always add the raw `θᵢ·I`.
pub fn homotopy_solve(
    w: &DenseMatrix,
    sched: &HomotopySchedule,
    cfg: &SolverConfig,
) -> Result<HomotopyResult> {
    sched.validate()?;
    let mut stages = Vec::new();
    let mut x: Option<DenseMatrix> = None;
    for theta in sched.thetas() {
        let v = build_gram(w, theta, ScalingMode::Raw).map_err(|_| Error::InfeasibleGram)?;
        let sol = match x.take() {
            None => solve(&v, cfg)?,
            Some(x0) => solve_from(&v, x0, cfg)?,
        };
        stages.push(StageResult {
            theta,
            objective: sol.objective,
            trace: sol.trace,
        });
        x = Some(sol.x);
    }
    Ok(HomotopyResult {
        x: x.expect("at least one stage runs"),
        stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_reaches_theta_min() {
        let thetas = HomotopySchedule::default().thetas();
        assert_eq!(thetas.len(), 11);
        assert_eq!(thetas[0], 1.0);
        assert!((thetas[10] - 1e-10).abs() < 1e-20);
    }

    #[test]
    fn stages_cap_the_schedule() {
        let s = HomotopySchedule {
            stages: 3,
            ..Default::default()
        };
        assert_eq!(s.thetas().len(), 4);
        let s = HomotopySchedule {
            theta_min: 1e-3,
            ..Default::default()
        };
        assert_eq!(s.thetas().len(), 4);
    }

    #[test]
    fn identity_workload_stays_at_identity() {
        let res = homotopy_solve(
            &DenseMatrix::identity(4),
            &HomotopySchedule::default(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(res.x, DenseMatrix::identity(4));
        assert_eq!(res.stages.len(), 11);
    }

    #[test]
    fn invalid_schedule_rejected() {
        let s = HomotopySchedule {
            decay: 1.5,
            ..Default::default()
        };
        assert!(homotopy_solve(&DenseMatrix::identity(2), &s, &SolverConfig::default()).is_err());
    }
}
