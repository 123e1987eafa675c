//! Exit-code contracts and file outputs of the command-line surface.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_geoprox")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const SCALAR: &str = r#"{
  "manifold": {"kind": "euclidean", "dim": 2},
  "problem": {"name": "sqdist", "anchors": [[0.0, 0.0]], "start": [1.0, 0.0]},
  "cone": {"kind": "scalar"},
  "outer": {"lambda": {"kind": "constant", "value": 2.0}, "seed": 7}
}"#;

#[test]
fn run_scalar_converges_to_origin_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scalar.json", SCALAR);
    let out = dir.path().join("out");
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("status=step_converged"), "stdout: {stdout}");

    let rows = geoprox::trace_io::csv_to_rows(
        &std::fs::read_to_string(out.join("trace.csv")).unwrap(),
    )
    .unwrap();
    let last = rows.last().unwrap();
    let norm: f64 = last.coords.iter().map(|c| c * c).sum::<f64>().sqrt();
    assert!(norm <= 1e-6, "final point {:?}", last.coords);

    let result_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result_json["schema_version"], "1");
    assert_eq!(result_json["status"], "step_converged");
    assert_eq!(result_json["audits"]["descent"]["pass"], true);
    assert_eq!(result_json["audits"]["fejer"]["pass"], true);
}

#[test]
fn zero_lambda_rejected_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        &SCALAR.replace("\"value\": 2.0", "\"value\": 0.0"),
    );
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("positive"), "stderr: {stderr}");
}

#[test]
fn exhausted_outer_budget_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "short.json",
        &SCALAR.replace(
            "\"seed\": 7",
            "\"seed\": 7, \"max_outer\": 1, \"tol_step\": 1e-12",
        ),
    );
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "unknown.json",
        &SCALAR.replace("\"seed\": 7", "\"seed\": 7, \"bogus\": 1"),
    );
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn check_geometry_passes_and_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let result = Command::new(bin())
        .args(["check", "--suite", "geometry", "--seed", "7", "--out"])
        .arg(&report_path)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["schema_version"], "1");
    assert_eq!(report["all_pass"], true);
    let props = report["suites"][0]["properties"].as_array().unwrap();
    assert!(props.iter().any(|p| p["name"] == "exp_log_round_trip"));
}

#[test]
fn check_all_suites_pass() {
    let result = Command::new(bin())
        .args(["check", "--suite", "all", "--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(0));
}

#[test]
fn unknown_suite_exits_one() {
    let result = Command::new(bin())
        .args(["check", "--suite", "bogus"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn compare_refuses_hyperbolic_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "hyp.json",
        r#"{
          "manifold": {"kind": "hyperboloid", "dim": 2},
          "problem": {"name": "sqdist", "anchors": [[0.5, 0.0], [-0.5, 0.3]], "start": [1.0, 1.0], "spatial": true},
          "cone": {"kind": "orthant"},
          "outer": {"lambda": {"kind": "constant", "value": 1.0}}
        }"#,
    );
    let result = Command::new(bin())
        .args(["compare", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn compare_handles_parameter_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "seq.json",
        r#"{
          "manifold": {"kind": "euclidean", "dim": 2},
          "problem": {"name": "sqdist", "anchors": [[0.0, 0.0], [1.0, 0.0]], "start": [2.0, 2.0]},
          "cone": {"kind": "orthant"},
          "outer": {"lambda": {"kind": "sequence", "values": [0.5, 2.0, 1.0]}, "seed": 7}
        }"#,
    );
    let result = Command::new(bin())
        .args(["compare", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(
        result.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
}

#[test]
fn trace_round_trips_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scalar.json", SCALAR);
    let out = dir.path().join("out");
    let status = Command::new(bin())
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let rows = geoprox::trace_io::csv_to_rows(&text).unwrap();
    let again = geoprox::trace_io::rows_to_csv(&rows).unwrap();
    assert_eq!(text, again);
}
