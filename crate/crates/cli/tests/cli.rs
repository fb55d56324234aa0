use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn detpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_detpath"))
        .args(args)
        .env_remove("DETPATH_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not a report ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn single_particle_median() {
    let out = detpath(&["gue", "--matrix-size", "1", "--times", "0", "--thresholds", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let id = &r["results"]["identity"];
    assert!((id["lhs"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((id["rhs"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(r["pass"], true);
    assert_eq!(r["command"], "gue");
    assert_eq!(r["provenance"]["tolerances"]["identity"], 1e-8);
    assert!(r["provenance"]["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(detpath(&["gue", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(detpath(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(detpath(&[]).status.code(), Some(1));
    assert_eq!(detpath(&["gue", "--times", "0"]).status.code(), Some(1));
    assert_eq!(detpath(&["mc-gue", "--times", "0", "--thresholds", "0"]).status.code(), Some(1));
    assert_eq!(detpath(&["lgv-verify", "--graph", "/nonexistent/graph.json"]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    let out = detpath(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("identity-check"));
    let out = detpath(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("detpath "));
}

#[test]
fn quick_suite_passes() {
    let out = detpath(&["suite", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert_eq!(r["results"]["passed"], r["results"]["total"]);
}

#[test]
fn results_are_deterministic() {
    let args = ["mc-gue", "--matrix-size", "2", "--times", "0,0.7", "--thresholds", "0.4,0.9", "--samples", "500", "--seed", "11"];
    let a = report(&detpath(&args));
    let b = report(&detpath(&args));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["provenance"]["seed"], 11);
    let c = report(&detpath(&["lgv-verify", "--seed", "4"]));
    let d = report(&detpath(&["lgv-verify", "--seed", "4"]));
    assert_eq!(c["results"], d["results"]);
}

#[test]
fn config_file_supplies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"matrix_size": 1, "times": [0], "thresholds": [0]}"#);
    let r = report(&detpath(&["--config", &cfg, "gue"]));
    assert!((r["results"]["identity"]["lhs"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let r = report(&detpath(&["--config", &cfg, "gue", "--thresholds", "10"]));
    assert_eq!(r["inputs"]["thresholds"], serde_json::json!([10.0]));
    assert!((r["results"]["identity"]["lhs"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"matrix_size": 1, "times": [0], "thresholds": [0], "nodez": 4}"#);
    let out = detpath(&["--config", &cfg, "gue"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodez"));
}

#[test]
fn artifacts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = detpath(&["airy2", "--tw", "-3:1:5", "--output-dir", d]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("airy2_tracy_widom.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "s,F2");
    assert_eq!(lines.len(), 6);
    let f: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    let svg = std::fs::read_to_string(dir.path().join("airy2_tracy_widom.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("airy2.json")).unwrap()).unwrap();
    assert_eq!(saved["results"], report(&out)["results"]);
}

#[test]
fn empty_table_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = detpath(&["airy2", "--tw", "0:1:0", "--output-dir", d]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("airy2_tracy_widom.csv")).unwrap();
    assert_eq!(csv, "s,F2\n");
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_detpath"))
        .args(["gue", "--edge-study", "10,20"])
        .env("DETPATH_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("gue.json").exists());
    let csv = std::fs::read_to_string(dir.path().join("gue_edge_study.csv")).unwrap();
    assert!(csv.starts_with("N,max_deviation\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn graph_document_is_verified() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(
        dir.path(),
        "g.json",
        r#"{"layers": [[0, 1], [0, 1]], "edges": [[[0, 0], [0, 1], [1, 1]]],
            "weights": [["1", "2", "3"]], "sources": [0, 1], "sinks": [0, 1]}"#,
    );
    let out = detpath(&["lgv-verify", "--graph", &g]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["lgv"]["determinant"], "3");
    assert_eq!(r["results"]["lgv"]["brute_sum"], "3");
    assert_eq!(r["results"]["lgv"]["systems"], 1);
}

#[test]
fn family_document_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "good.json",
        r#"{"kernels": [[[1.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]],
            "forward": [{"i": 0, "j": 1, "matrix": [[0.5, 0.0], [0.0, 0.25]]}],
            "backward": [{"i": 0, "j": 1, "matrix": [[2.0, 0.0], [0.0, 0.0]]}],
            "q": [[0.3, 0.1], [0.6, 0.2]]}"#,
    );
    let out = detpath(&["identity-check", "--family", &good]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"kernels": [[[1.0, 0.3], [0.0, 0.0]], [[0.2, 0.0], [0.5, 1.0]]],
            "forward": [{"i": 0, "j": 1, "matrix": [[0.5, 0.7], [0.1, 0.25]]}],
            "backward": [{"i": 0, "j": 1, "matrix": [[2.0, 0.0], [0.4, 0.0]]}],
            "q": [[0.3, 0.1], [0.6, 0.2]]}"#,
    );
    let out = detpath(&["identity-check", "--family", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn generated_family_passes() {
    let out = detpath(&["identity-check", "--seed", "9", "--n", "4", "--d", "5", "--spectrum", "0,0.5,1,1.5,2", "--rank", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["residuals"]["pass"], true);
    assert_eq!(r["provenance"]["seed"], 9);
}
