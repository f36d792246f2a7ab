use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracdual"))
}

fn run_config(dir: &Path, name: &str, text: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{name}.json"));
    std::fs::write(&cfg, text).unwrap();
    let out = dir.join(name);
    bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap()
}

fn report(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(name).join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn list_prints_every_experiment() {
    let out = bin().arg("--list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "fundamental_solution",
        "duality_convergence",
        "regularity_sweep",
        "young_suite",
        "lemma24_suite",
        "embedding_suite",
    ] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}

#[test]
fn order_out_of_range_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "bad",
        r#"{"experiment":"young_suite","params":{"N":2,"s":0.4}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("(1/2, 1)"), "{err}");
}

#[test]
fn unknown_keys_and_missing_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "extra",
        r#"{"experiment":"young_suite","params":{"N":2,"s":0.75},"grid_size":3}"#,
        &["--validate"],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["run", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unresolved_mollifier_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "thin",
        r#"{"experiment":"duality_convergence","params":{"N":2,"s":0.75},
            "grid":{"half_width":1.5,"resolutions":[64]}}"#,
        &["--validate"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("two grid cells"));
}

#[test]
fn validate_only_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "ok",
        r#"{"experiment":"duality_convergence","params":{"N":2,"s":0.75}}"#,
        &["--validate"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("ok").exists());
}

#[test]
fn empty_measure_gives_zero_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "empty",
        r#"{"experiment":"duality_convergence","params":{"N":2,"s":0.75},"atoms":[],
            "grid":{"half_width":1.5,"resolutions":[128]},
            "mollifier":{"profile":"gaussian_truncated","bandwidth":0.2,"levels":3},
            "refinement":{"half_width":1.0,"resolutions":[32,64,128]}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "empty");
    assert_eq!(r["pass"], Value::Bool(true));
    let s = &r["summary"];
    for key in ["limit_error", "sobolev_spread", "worst_finest_residual", "pipeline_battery_worst"] {
        assert_eq!(s[key].as_f64(), Some(0.0), "{key}");
    }
    assert!(s["cauchy_differences"].as_array().unwrap().iter().all(|v| v.as_f64() == Some(0.0)));
}

#[test]
fn fundamental_solution_reports_critical_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "fs",
        r#"{"experiment":"fundamental_solution","params":{"N":2,"s":0.75}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "fs");
    assert_eq!(r["summary"]["r_star"].as_f64(), Some(4.0));
    assert!((r["summary"]["q_star"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-12);
    assert_eq!(r["items"].as_array().unwrap().len(), 9);
    assert!(r["items"].as_array().unwrap().iter().all(|i| i["pass"] == Value::Bool(true)));
}

#[test]
fn assertion_failure_exits_1_and_names_it() {
    // Grids this coarse cannot reach the residual target.
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "coarse",
        r#"{"experiment":"duality_convergence","params":{"N":2,"s":0.75},
            "grid":{"half_width":1.5,"resolutions":[64]},
            "mollifier":{"profile":"polynomial_bump","bandwidth":0.4,"levels":3},
            "refinement":{"half_width":1.0,"resolutions":[32,64,128]}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path(), "coarse");
    assert_eq!(r["pass"], Value::Bool(false));
    assert!(r["first_failure"].as_str().unwrap().starts_with("refinement:"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("first failing assertion"));
}

#[test]
fn csv_has_exact_header_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"experiment":"young_suite","params":{"N":2,"s":0.75},"trials":8,"seed":3}"#;
    let a = run_config(dir.path(), "a", text, &[]);
    let b = run_config(dir.path(), "b", text, &[]);
    assert!(a.status.success() && b.status.success());
    let ca = std::fs::read(dir.path().join("a/results.csv")).unwrap();
    let cb = std::fs::read(dir.path().join("b/results.csv")).unwrap();
    assert_eq!(ca, cb);
    let first = String::from_utf8(ca.clone()).unwrap();
    assert_eq!(first.lines().next(), Some("experiment,N,s,param,level,value,flag"));
    let c = run_config(dir.path(), "c", text, &["--seed", "4"]);
    assert!(c.status.success());
    let cc = std::fs::read(dir.path().join("c/results.csv")).unwrap();
    assert_ne!(ca, cc);
    assert_eq!(report(dir.path(), "c")["config"]["seed"].as_u64(), Some(4));
}

#[test]
fn report_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"experiment":"lemma24_suite","params":{"N":2,"s":0.75},"trials":2,
        "exponents":{"sigma":[1.2,2.0]},"seed":11}"#;
    let out = run_config(dir.path(), "echo", text, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "echo");
    let echoed: fracdual_cli::ExperimentConfig = serde_json::from_value(r["config"].clone()).unwrap();
    assert_eq!(echoed, fracdual_cli::ExperimentConfig::from_json(text).unwrap());
    // sigma = 1.2 <= N/(2s) is rejected, which is the expected outcome.
    let rejected = r["items"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["name"].as_str().unwrap().ends_with("sigma=1.2"))
        .count();
    assert_eq!(rejected, 2);
}
