//! Grid runs. Points are independent, so workers pull them from a shared
//! counter; finished rows go through one writer in grid order.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use dpopt_core::{evaluate, extract_strategy, PrivacyParams, WorkloadFamily};
use serde_json::json;

use crate::commands::{
    ensure_dir, run_optimizer, solver_config, workload_spec, write_json, write_with,
};
use crate::failure::{CmdResult, Failure};
use crate::SweepArgs;

const HEADER: &str = "family,m,n,seed,status,iterations,objective,gram_ms,optimize_ms,evaluate_ms,\
analytic,empirical,gm_baseline,ratio,message";

#[derive(Clone, Copy, Debug)]
struct Point {
    family: WorkloadFamily,
    m: usize,
    n: usize,
    seed: u64,
}

fn grid(args: &SweepArgs) -> Vec<Point> {
    let mut points = Vec::new();
    for &family in &args.family {
        for &m in &args.m {
            for &n in &args.n {
                for &seed in &args.seeds {
                    points.push(Point { family, m, n, seed });
                }
            }
        }
    }
    points
}

/// Worker count: `DPOPT_THREADS` when set to a positive integer, otherwise
/// the available parallelism.
fn threads() -> CmdResult<usize> {
    match std::env::var("DPOPT_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(t),
            _ => Err(Failure::Usage(format!(
                "DPOPT_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn run_point(p: Point, args: &SweepArgs, pp: &PrivacyParams) -> String {
    let prefix = format!("{},{},{},{}", p.family, p.m, p.n, p.seed);
    let outcome = (|| -> CmdResult<String> {
        let w = workload_spec(p.family, p.m, p.n, None, None)?
            .generate(p.seed)?
            .into_matrix();
        let opt = run_optimizer(&w, &args.solver)?;
        let strategy = extract_strategy(&opt.x)?;
        let start = Instant::now();
        let report = evaluate(&w, &strategy, pp, args.trials, p.seed)?;
        let evaluate_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(format!(
            "ok,{},{},{:.3},{:.3},{:.3},{},{},{},{},",
            opt.iterations,
            opt.objective,
            opt.gram_ms,
            opt.optimize_ms,
            evaluate_ms,
            report.analytic_expected_error,
            report.empirical_mean_error,
            report.gm_baseline_error,
            report.ratio_vs_gm
        ))
    })();
    match outcome {
        Ok(rest) => format!("{prefix},{rest}"),
        Err(f) => format!(
            "{prefix},error,,,,,,,,,,{}",
            f.to_string().replace([',', '\n'], ";")
        ),
    }
}

pub fn run(args: &SweepArgs) -> CmdResult {
    let points = grid(args);
    if points.is_empty() {
        return Err(Failure::Usage(
            "empty grid: give at least one value for --m and --n".into(),
        ));
    }
    if args.trials == 0 {
        return Err(Failure::Usage("trials must be >= 1".into()));
    }
    solver_config(&args.solver)?;
    let pp = PrivacyParams::new(args.epsilon, args.delta)?;
    let workers = threads()?.min(points.len());
    ensure_dir(&args.out)?;

    let started = Instant::now();
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, String)>();
    let mut failures = 0;
    let csv_path = args.out.join("sweep.csv");
    write_with(&csv_path, |out| {
        writeln!(out, "{HEADER}")?;
        std::thread::scope(|scope| {
            for _ in 0..workers {
                let tx = tx.clone();
                let (next, points, pp) = (&next, &points, &pp);
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&p) = points.get(i) else { break };
                    if tx.send((i, run_point(p, args, pp))).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            // rows arrive in any order; emit them in grid order
            let mut pending = BTreeMap::new();
            let mut emitted = 0;
            for (i, row) in rx {
                pending.insert(i, row);
                while let Some(row) = pending.remove(&emitted) {
                    if row.split(',').nth(4) == Some("error") {
                        failures += 1;
                    }
                    writeln!(out, "{row}")?;
                    emitted += 1;
                }
            }
            Ok(())
        })
    })?;

    write_json(
        &args.out.join("sweep.meta.json"),
        &json!({
            "config": args,
            "points": points.len(),
            "failures": failures,
            "threads": workers,
            "seeds": args.seeds,
            "wall_clock_ms": started.elapsed().as_secs_f64() * 1e3,
        }),
    )?;
    if failures > 0 {
        eprintln!(
            "dpopt: {failures} of {} grid points failed; see {}",
            points.len(),
            csv_path.display()
        );
    }
    Ok(())
}
