//! `dpopt`: generate workloads, optimize strategies, evaluate errors and run
//! parameter sweeps.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 numeric or domain failure.

mod commands;
mod failure;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dpopt_core::{ScalingMode, WorkloadFamily};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "dpopt",
    version,
    about = "Strategy optimization for private linear queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic workload and write it as CSV plus a metadata sidecar.
    Generate(GenerateArgs),
    /// Optimize a strategy for a workload file.
    Optimize(OptimizeArgs),
    /// Compare a strategy's error with the plain Gaussian mechanism.
    Evaluate(EvaluateArgs),
    /// Generate, optimize and evaluate over a grid of sizes.
    Sweep(SweepArgs),
}

#[derive(Args, Serialize, Clone, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub family: WorkloadFamily,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Entry probability for wdiscrete.
    #[arg(long)]
    pub p: Option<f64>,
    /// Rank for wrelated.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; metadata goes next to it as `<stem>.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize, Clone, Debug)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub theta: f64,
    #[arg(long, default_value = "meandiag")]
    pub scaling: ScalingMode,
    #[arg(long, default_value_t = 30)]
    pub max_outer: usize,
    #[arg(long, default_value_t = 5)]
    pub cg_iters: usize,
    /// Run the regularization continuation (raw θ from 1 down to 1e-10).
    #[arg(long)]
    pub homotopy: bool,
    /// Cap on continuation stages.
    #[arg(long, default_value_t = 10)]
    pub stages: usize,
}

#[derive(Args, Serialize, Clone, Debug)]
pub struct OptimizeArgs {
    /// Workload CSV.
    #[arg(long)]
    pub workload: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory for X.csv, strategy.csv, trace.json and trace.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize, Clone, Debug)]
pub struct PrivacyArgs {
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Serialize, Clone, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub workload: PathBuf,
    /// Strategy CSV; the identity when omitted.
    #[arg(long)]
    pub strategy: Option<PathBuf>,
    #[command(flatten)]
    pub privacy: PrivacyArgs,
    /// Output directory for report.json and comparison.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize, Clone, Debug)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub family: Vec<WorkloadFamily>,
    #[arg(long, value_delimiter = ',')]
    pub m: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Workload seeds; every grid point runs once per seed.
    #[arg(long = "seed", value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Output directory for sweep.csv and sweep.meta.json.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 2 on usage errors and 0 for --help
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Optimize(a) => commands::optimize(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Sweep(a) => sweep::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dpopt: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
