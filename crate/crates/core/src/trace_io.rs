//! Trace file formats.
//!
//! CSV columns, in order: `k, step, f_k_value, feas_residual, inner_iters,
//! wall_ms, F0..F{m-1}, x0..x{d-1}`. Floats are written in scientific
//! notation with 17 significant digits, so files parse back losslessly.
//! The `wall_ms` column is written as zero unless timing output is enabled:
//! trace files are byte-reproducible for a fixed config and seed by default,
//! and real timings would break that.
//!
//! The JSON result carries the terminal state plus audit summaries and a
//! `schema_version` field.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::proxpoint::{descent_audit, fejer_audit, SolveTrace};

/// 17 significant digits: exact round-trip for f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_wall(ms: f64) -> String {
    format!("{ms:.3}")
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub k: usize,
    pub step: f64,
    pub f_value: f64,
    pub feas_residual: f64,
    pub inner_iters: usize,
    pub wall_ms: f64,
    pub objective: Vec<f64>,
    pub coords: Vec<f64>,
}

fn header(m: usize, d: usize) -> String {
    let mut cols = vec![
        "k".to_string(),
        "step".to_string(),
        "f_k_value".to_string(),
        "feas_residual".to_string(),
        "inner_iters".to_string(),
        "wall_ms".to_string(),
    ];
    cols.extend((0..m).map(|i| format!("F{i}")));
    cols.extend((0..d).map(|i| format!("x{i}")));
    cols.join(",")
}

/// Render a trace as CSV. With `timing` disabled the wall column is zeroed.
pub fn trace_to_csv(trace: &SolveTrace, timing: bool) -> String {
    let m = trace.records[0].objective.len();
    let d = trace.records[0].point.coords().len();
    let mut out = String::new();
    out.push_str(&header(m, d));
    out.push('\n');
    for rec in &trace.records {
        let mut fields = vec![
            rec.k.to_string(),
            fmt_float(rec.step),
            fmt_float(rec.scalarized),
            fmt_float(rec.feas_residual),
            rec.inner_iters.to_string(),
            fmt_wall(if timing { rec.wall_ms } else { 0.0 }),
        ];
        fields.extend(rec.objective.iter().map(|v| fmt_float(*v)));
        fields.extend(rec.point.coords().iter().map(|v| fmt_float(*v)));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Render parsed rows back to CSV (byte-identical round trip).
pub fn rows_to_csv(rows: &[CsvRow]) -> Result<String> {
    let first = rows
        .first()
        .ok_or_else(|| Error::TraceParse("empty row set".into()))?;
    let (m, d) = (first.objective.len(), first.coords.len());
    let mut out = String::new();
    out.push_str(&header(m, d));
    out.push('\n');
    for row in rows {
        let mut fields = vec![
            row.k.to_string(),
            fmt_float(row.step),
            fmt_float(row.f_value),
            fmt_float(row.feas_residual),
            row.inner_iters.to_string(),
            fmt_wall(row.wall_ms),
        ];
        fields.extend(row.objective.iter().map(|v| fmt_float(*v)));
        fields.extend(row.coords.iter().map(|v| fmt_float(*v)));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Parse a trace CSV produced by [`trace_to_csv`].
pub fn csv_to_rows(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::TraceParse("missing header".into()))?;
    let cols: Vec<&str> = head.split(',').collect();
    let fixed = ["k", "step", "f_k_value", "feas_residual", "inner_iters", "wall_ms"];
    if cols.len() < fixed.len() || cols[..fixed.len()] != fixed {
        return Err(Error::TraceParse(format!("unexpected header: {head}")));
    }
    let m = cols[fixed.len()..]
        .iter()
        .take_while(|c| c.starts_with('F'))
        .count();
    let d = cols.len() - fixed.len() - m;
    if m == 0 || d == 0 {
        return Err(Error::TraceParse("header lacks objective or coordinate columns".into()));
    }

    let parse_f = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|e| Error::TraceParse(format!("bad float {s:?}: {e}")))
    };
    let parse_u = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|e| Error::TraceParse(format!("bad integer {s:?}: {e}")))
    };

    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(Error::TraceParse(format!(
                "row has {} fields, expected {}",
                f.len(),
                cols.len()
            )));
        }
        rows.push(CsvRow {
            k: parse_u(f[0])?,
            step: parse_f(f[1])?,
            f_value: parse_f(f[2])?,
            feas_residual: parse_f(f[3])?,
            inner_iters: parse_u(f[4])?,
            wall_ms: parse_f(f[5])?,
            objective: f[6..6 + m].iter().map(|s| parse_f(s)).collect::<Result<_>>()?,
            coords: f[6 + m..].iter().map(|s| parse_f(s)).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// JSON result
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct TerminalJson {
    pub coords: Vec<f64>,
    pub objective: Vec<f64>,
    pub scalarized: f64,
    pub step: f64,
    pub feas_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentJson {
    pub pass: bool,
    pub worst_cone_margin: f64,
    pub worst_lyapunov_excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FejerJson {
    pub pass: bool,
    pub witness_dominates: bool,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditsJson {
    pub descent: DescentJson,
    /// Monotonicity of distances toward the declared witness when present,
    /// otherwise toward the terminal iterate.
    pub fejer: FejerJson,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResultJson {
    pub schema_version: String,
    pub status: String,
    pub iterations: usize,
    pub manifold: String,
    pub terminal: TerminalJson,
    pub total_inner_iterations: usize,
    pub total_wall_ms: f64,
    pub audits: AuditsJson,
}

/// Summarize a finished run, including the standard audits.
pub fn run_result(instance: &ProblemInstance, trace: &SolveTrace) -> Result<RunResultJson> {
    let terminal = trace.terminal();
    let descent = descent_audit(trace, &instance.generators)?;
    let witness = instance
        .witness
        .clone()
        .unwrap_or_else(|| terminal.point.clone());
    let fejer = fejer_audit(instance, trace, &witness, 1e-10)?;
    Ok(RunResultJson {
        schema_version: "1".to_string(),
        status: trace.status.as_str().to_string(),
        iterations: trace.iterations(),
        manifold: terminal.point.manifold().to_string(),
        terminal: TerminalJson {
            coords: terminal.point.coords().to_vec(),
            objective: terminal.objective.clone(),
            scalarized: terminal.scalarized,
            step: terminal.step,
            feas_residual: terminal.feas_residual,
        },
        total_inner_iterations: trace.records.iter().map(|r| r.inner_iters).sum(),
        total_wall_ms: trace.records.iter().map(|r| r.wall_ms).sum(),
        audits: AuditsJson {
            descent: DescentJson {
                pass: descent.passed(),
                worst_cone_margin: descent.worst_cone_margin,
                worst_lyapunov_excess: descent.worst_lyapunov_excess,
            },
            fejer: FejerJson {
                pass: fejer.passed(),
                witness_dominates: fejer.witness_dominates,
                max_violation: fejer.max_violation,
            },
        },
    })
}
