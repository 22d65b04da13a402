use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use dpopt_core::workloads::{load_matrix, save_matrix, WorkloadMetadata};
use dpopt_core::{
    build_gram, evaluate as evaluate_strategy, extract_strategy, homotopy_solve, solve,
    DenseMatrix, Error, HomotopySchedule, PrivacyParams, SolverConfig, StrategyMatrix,
    WorkloadFamily, WorkloadSpec,
};
use serde::Serialize;
use serde_json::json;

use crate::failure::{CmdResult, Failure};
use crate::{EvaluateArgs, GenerateArgs, OptimizeArgs, SolverArgs};

/// `w.csv` → `w.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CmdResult {
    let file = File::create(path).map_err(|e| Failure::io(path.display(), e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::io(path.display(), e))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| Failure::io(path.display(), e))
}

pub fn write_with(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> CmdResult {
    let file = File::create(path).map_err(|e| Failure::io(path.display(), e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Failure::io(path.display(), e))
}

pub fn ensure_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir.display(), e))
}

fn save(m: &DenseMatrix, path: &Path) -> CmdResult {
    save_matrix(m, path).map_err(|e| match e {
        Error::Io(io) => Failure::io(path.display(), io),
        other => other.into(),
    })
}

fn load(path: &Path) -> CmdResult<DenseMatrix> {
    load_matrix(path).map_err(|e| match e {
        Error::Io(io) => Failure::io(path.display(), io),
        Error::MalformedFile { .. } => Failure::Io(format!("{}: {e}", path.display())),
        other => other.into(),
    })
}

/// Metadata sidecar of a workload file, if one is present and parses.
fn read_metadata(workload: &Path) -> Option<WorkloadMetadata> {
    let text = fs::read_to_string(meta_path(workload)).ok()?;
    let value: serde_json::Value = serde_json::from_str(&text).ok()?;
    serde_json::from_value(value.get("workload")?.clone()).ok()
}

pub fn workload_spec(
    family: WorkloadFamily,
    m: usize,
    n: usize,
    p: Option<f64>,
    rank: Option<usize>,
) -> CmdResult<WorkloadSpec> {
    let mut spec = WorkloadSpec::with_defaults(family, m, n);
    match (&mut spec, p, rank) {
        (WorkloadSpec::External { .. }, _, _) => {
            return Err(Failure::Usage(
                "cannot generate an external workload".into(),
            ))
        }
        (WorkloadSpec::WDiscrete { p: slot, .. }, Some(p), _) => *slot = p,
        (WorkloadSpec::WRelated { s, .. }, _, Some(r)) => *s = r,
        _ => {}
    }
    Ok(spec)
}

pub fn generate(args: &GenerateArgs) -> CmdResult {
    let spec = workload_spec(
        args.family,
        args.m as usize,
        args.n as usize,
        args.p,
        args.rank,
    )?;
    let w = spec.generate(args.seed)?;
    save(w.matrix(), &args.out)?;
    write_json(
        &meta_path(&args.out),
        &json!({ "config": args, "workload": w.metadata() }),
    )
}

pub fn solver_config(args: &SolverArgs) -> CmdResult<SolverConfig> {
    let cfg = SolverConfig {
        theta: args.theta,
        scaling: args.scaling,
        max_outer: args.max_outer,
        cg_iters: args.cg_iters,
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Result of one optimize run, with per-phase wall-clock times.
pub struct Optimized {
    pub x: DenseMatrix,
    pub objective: f64,
    pub iterations: usize,
    pub gram_ms: f64,
    pub optimize_ms: f64,
    pub trace_json: serde_json::Value,
    pub trace_csv: Vec<u8>,
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn run_optimizer(w: &DenseMatrix, args: &SolverArgs) -> CmdResult<Optimized> {
    let cfg = solver_config(args)?;
    let mut trace_csv = Vec::new();
    if args.homotopy {
        let sched = HomotopySchedule {
            stages: args.stages,
            ..Default::default()
        };
        let start = Instant::now();
        let res = homotopy_solve(w, &sched, &cfg)?;
        let optimize_ms = ms_since(start);
        res.write_csv(&mut trace_csv).expect("in-memory write");
        let iterations = res.stages.iter().map(|s| s.trace.outer_iterations()).sum();
        return Ok(Optimized {
            objective: res.final_objective(),
            trace_json: res.to_json(&json!({ "solver": cfg, "schedule": sched })),
            x: res.x,
            iterations,
            gram_ms: 0.0,
            optimize_ms,
            trace_csv,
        });
    }
    let start = Instant::now();
    let v =
        build_gram(w, cfg.theta, cfg.scaling).map_err(|_| Failure::from(Error::InfeasibleGram))?;
    let gram_ms = ms_since(start);
    let start = Instant::now();
    let sol = solve(&v, &cfg)?;
    let optimize_ms = ms_since(start);
    sol.trace
        .write_csv(&mut trace_csv)
        .expect("in-memory write");
    Ok(Optimized {
        objective: sol.objective,
        iterations: sol.trace.outer_iterations(),
        trace_json: sol.trace.to_json(&cfg),
        x: sol.x,
        gram_ms,
        optimize_ms,
        trace_csv,
    })
}

pub fn optimize(args: &OptimizeArgs) -> CmdResult {
    solver_config(&args.solver)?;
    let w = load(&args.workload)?;
    let res = run_optimizer(&w, &args.solver)?;
    let strategy = extract_strategy(&res.x)?;

    ensure_dir(&args.out)?;
    save(&res.x, &args.out.join("X.csv"))?;
    save(strategy.matrix(), &args.out.join("strategy.csv"))?;
    let mut trace = res.trace_json;
    trace["command"] = json!({ "config": args, "workload": read_metadata(&args.workload) });
    trace["objective"] = json!(res.objective);
    trace["timing_ms"] = json!({ "gram": res.gram_ms, "optimize": res.optimize_ms });
    write_json(&args.out.join("trace.json"), &trace)?;
    write_with(&args.out.join("trace.csv"), |out| {
        out.write_all(&res.trace_csv)
    })
}

pub fn evaluate(args: &EvaluateArgs) -> CmdResult {
    let w = load(&args.workload)?;
    let a = match &args.strategy {
        Some(path) => load(path)?,
        None => DenseMatrix::identity(w.cols()),
    };
    let strategy = StrategyMatrix::new(a)?;
    let pp = PrivacyParams::new(args.privacy.epsilon, args.privacy.delta)?;
    let start = Instant::now();
    let report = evaluate_strategy(&w, &strategy, &pp, args.privacy.trials, args.privacy.seed)?;
    let evaluate_ms = ms_since(start);

    let meta = read_metadata(&args.workload);
    let family = meta
        .as_ref()
        .map_or(WorkloadFamily::External, |m| m.spec.family());
    ensure_dir(&args.out)?;
    write_json(
        &args.out.join("report.json"),
        &json!({
            "config": args,
            "workload": meta,
            "report": report,
            "timing_ms": { "evaluate": evaluate_ms },
        }),
    )?;
    write_with(&args.out.join("comparison.csv"), |out| {
        writeln!(out, "{}", dpopt_core::ErrorReport::CSV_HEADER)?;
        writeln!(out, "{}", report.csv_row(family.name()))
    })
}
