use std::path::{Path, PathBuf};
use std::process::Command;

use cusign_cli::trace::TRACE_COLUMNS;

fn cusign() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cusign"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

#[test]
fn validate_exits_zero() {
    let out = cusign().args(["validate", "-q"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["metadata"]["command"], "validate");
}

#[test]
fn usage_errors_exit_two() {
    let out = cusign().args(["table2", "--samples", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = cusign().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = cusign().args(["scenario", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scenario_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let report = dir.path().join(format!("report{run}.csv"));
        let trace = dir.path().join(format!("trace{run}.csv"));
        let status = cusign()
            .arg("scenario")
            .arg(config("persistent.toml"))
            .args(["--format", "csv", "-q", "--out"])
            .arg(&report)
            .arg("--trace")
            .arg(&trace)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push((std::fs::read(&report).unwrap(), std::fs::read(&trace).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);

    let trace = String::from_utf8(outputs[0].1.clone()).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), TRACE_COLUMNS.join(","));
    assert_eq!(lines.count(), 20_000);
}

#[test]
fn statistical_report_is_reproducible() {
    let run = || {
        cusign()
            .args([
                "table2",
                "--samples",
                "20000",
                "--seed",
                "5",
                "--format",
                "csv",
                "-q",
            ])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout)
        .unwrap()
        .starts_with("table,case,expected,measured,tolerance,pass,note"));
}

#[test]
fn histogram_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("hist.csv");
    let status = cusign()
        .args(["theta", "--tau", "2", "--samples", "100000", "-q", "--out"])
        .arg(dir.path().join("theta.json"))
        .arg("--histogram")
        .arg(&hist)
        .status()
        .unwrap();
    assert!(status.code() == Some(0) || status.code() == Some(1));
    let text = std::fs::read_to_string(hist).unwrap();
    assert!(text.starts_with("tau,lower,upper,count\n2,"));
}
