//! Command implementations. Each returns the process exit code.
//!
//! `run`: 0 converged by step size, 2 outer budget exhausted, 3 inner
//! failure, 1 configuration error. `check`: 0 all properties pass, 2 some
//! failed, 1 unknown suite. `compare`: 0 agreement, 2 disagreement, 1
//! precondition not met.

use std::path::Path;
use std::str::FromStr;

use geoprox::checks::{run_check, Suite};
use geoprox::config::RunConfig;
use geoprox::error::Error;
use geoprox::manifold::dist;
use geoprox::proxpoint::{run, DirectionSchedule, RunStatus};
use geoprox::trace_io::{fmt_float, run_result, trace_to_csv};
use geoprox::ManifoldPoint;

use crate::flat::{run_flat, FlatInner};

pub fn cmd_run(config: &Path, out: &Path, seed: Option<u64>, verbose: bool) -> i32 {
    match run_inner(config, out, seed, verbose) {
        Ok(status) => match status {
            RunStatus::StepConverged => 0,
            RunStatus::MaxOuter => 2,
            RunStatus::InnerFailure => 3,
        },
        Err(Error::NonFinite(what)) => {
            eprintln!("error: inner solver produced a non-finite {what}");
            3
        }
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn run_inner(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    verbose: bool,
) -> geoprox::Result<RunStatus> {
    let cfg = RunConfig::load(config)?;
    let mut built = cfg.build()?;
    if let Some(seed) = seed {
        built.outer.seed = seed;
    }
    built.inner.verbose = verbose;

    let trace = run(&built.instance, &built.start, &built.outer, &built.inner)?;

    std::fs::create_dir_all(out)?;
    let csv = trace_to_csv(&trace, built.output.timing);
    std::fs::write(out.join(&built.output.trace_csv), csv)?;
    let result = run_result(&built.instance, &trace)?;
    std::fs::write(
        out.join(&built.output.result_json),
        serde_json::to_string_pretty(&result).map_err(Error::from)?,
    )?;

    let terminal = trace.terminal();
    println!(
        "status={} iterations={} final_f={} final_step={}",
        trace.status.as_str(),
        trace.iterations(),
        fmt_float(terminal.scalarized),
        fmt_float(terminal.step),
    );
    Ok(trace.status)
}

pub fn cmd_check(suite: &str, seed: u64, out: Option<&Path>) -> i32 {
    let suite = match Suite::from_str(suite) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    let report = match run_check(suite, seed) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    let text = match serde_json::to_string_pretty(&report) {
        Ok(t) => t,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    println!("{text}");
    if let Some(path) = out {
        if let Err(err) = std::fs::write(path, &text) {
            eprintln!("error: {err}");
            return 1;
        }
    }
    if report.all_pass {
        0
    } else {
        2
    }
}

pub fn cmd_compare(config: &Path, out: &Path, verbose: bool) -> i32 {
    match compare_inner(config, out, verbose) {
        Ok(max_gap) => {
            if max_gap <= 1e-6 {
                println!("compare ok: max iterate gap {}", fmt_float(max_gap));
                0
            } else {
                eprintln!("compare failed: max iterate gap {}", fmt_float(max_gap));
                2
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn compare_inner(config: &Path, out: &Path, verbose: bool) -> geoprox::Result<f64> {
    let cfg = RunConfig::load(config)?;
    let mut built = cfg.build()?;
    built.inner.verbose = verbose;

    // Preconditions of the flat reduction: Euclidean manifold, orthant
    // cone, quadratic problem, fixed direction proportional to (1,..,1).
    let manifold = built.start.manifold();
    if !manifold.is_euclidean() {
        return Err(Error::InvalidConfig(
            "compare is defined on the Euclidean manifold only".into(),
        ));
    }
    if !built.instance.generators.is_orthant() {
        return Err(Error::InvalidConfig("compare requires the orthant cone".into()));
    }
    if cfg.problem.name != "sqdist" {
        return Err(Error::InvalidConfig(
            "compare supports the sqdist problem only".into(),
        ));
    }
    match &built.outer.direction {
        DirectionSchedule::Fixed { e } => {
            let first = e[0];
            if first <= 0.0 || e.iter().any(|c| (c - first).abs() > 1e-9 * first.abs()) {
                return Err(Error::InvalidConfig(
                    "compare requires a fixed direction proportional to (1,..,1)".into(),
                ));
            }
        }
        DirectionSchedule::Cyclic { .. } => {
            return Err(Error::InvalidConfig(
                "compare requires a fixed direction".into(),
            ));
        }
    }

    let trace = run(&built.instance, &built.start, &built.outer, &built.inner)?;

    let anchors: Vec<Vec<f64>> = cfg.problem.anchors.clone();
    let lambda = built.outer.lambda.clone();
    let flat_inner = FlatInner {
        max_iters: built.inner.max_iters,
        min_iters: built.inner.min_iters,
        window: built.inner.window,
        tol_opt: built.inner.tol_opt,
        tol_feas: built.inner.tol_feas,
        step_c: built.inner.step_c,
    };
    let flat_iterates = run_flat(
        &anchors,
        &cfg.problem.start,
        |k| lambda.at(k),
        built.outer.tol_step,
        built.outer.max_outer,
        &flat_inner,
    );

    std::fs::create_dir_all(out)?;
    std::fs::write(
        out.join(&built.output.trace_csv),
        trace_to_csv(&trace, built.output.timing),
    )?;
    let mut flat_csv = String::from("k");
    for d in 0..cfg.problem.start.len() {
        flat_csv.push_str(&format!(",x{d}"));
    }
    flat_csv.push('\n');
    for (k, p) in flat_iterates.iter().enumerate() {
        flat_csv.push_str(&k.to_string());
        for c in p {
            flat_csv.push(',');
            flat_csv.push_str(&fmt_float(*c));
        }
        flat_csv.push('\n');
    }
    std::fs::write(out.join("flat_trace.csv"), flat_csv)?;

    if trace.records.len() != flat_iterates.len() {
        eprintln!(
            "iterate count mismatch: general {} vs flat {}",
            trace.records.len(),
            flat_iterates.len()
        );
        return Ok(f64::INFINITY);
    }
    let mut max_gap: f64 = 0.0;
    for (rec, flat) in trace.records.iter().zip(&flat_iterates) {
        let q = ManifoldPoint::new(manifold, flat.clone())?;
        max_gap = max_gap.max(dist(&rec.point, &q)?);
    }
    if verbose {
        eprintln!(
            "compared {} iterates, max gap {}",
            flat_iterates.len(),
            fmt_float(max_gap)
        );
    }
    Ok(max_gap)
}
