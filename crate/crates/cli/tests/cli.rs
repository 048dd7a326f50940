//! End-to-end tests of the command-line interface: exit codes, report
//! shape, and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ebethe"))
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("ebethe-{}-{name}", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("report must be valid JSON")
}

#[test]
fn verify_theta_suite_passes() {
    let cfg = write_config(
        "theta.json",
        r#"{"suite": "theta", "samples": 100, "seed": 7}"#,
    );
    let out = bin().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["overall_pass"], true);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    for c in checks {
        assert_eq!(c["pass"], true, "{c}");
        assert_eq!(c["samples_run"], 100);
        assert!(c["max_residual"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn verify_all_has_at_least_twelve_checks() {
    let cfg = write_config(
        "all.json",
        r#"{"z": [[0.1, 0.0], [0.45, 0.0]], "n": 2, "suite": "all", "samples": 5}"#,
    );
    let out = bin().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["overall_pass"], true);
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["check_name"].as_str().unwrap())
        .collect();
    assert!(names.len() >= 12, "only {} checks: {names:?}", names.len());
    let mut sorted = names.clone();
    sorted.sort_unstable();
    assert_eq!(names, sorted, "checks must be ordered by name");
}

#[test]
fn bethe_pipeline_single_site() {
    let cfg = write_config("b1.json", r#"{"z": [[0.3, 0.0]], "samples": 5}"#);
    let out = bin().args(["bethe", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["overall_pass"], true);
    let bethe = &report["bethe"];
    let roots = bethe["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 1);
    // Exact single-site root: z + eta + 1/2.
    assert!((roots[0][0].as_f64().unwrap() - 0.92).abs() < 1e-9);
    assert!((roots[0][1].as_f64().unwrap() - 0.03).abs() < 1e-9);
    assert!(bethe["in_cell"].as_bool().unwrap());
    assert_eq!(bethe["lambda_samples"].as_array().unwrap().len(), 5);
    assert!(!bethe["unwanted_terms"].as_array().unwrap().is_empty());
}

#[test]
fn reports_are_deterministic() {
    let cfg = write_config(
        "det.json",
        r#"{"z": [[0.1, 0.0], [0.45, 0.0]], "suite": "rmatrix", "samples": 10, "seed": 99}"#,
    );
    let strip = |out: &Output| {
        let mut v = stdout_json(out);
        v["environment"]["wall_time_ms"] = 0.into();
        v.to_string()
    };
    let a = bin().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    let b = bin().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    for (body, field) in [
        (r#"{"tau": [0.5, -0.1]}"#, "tau"),
        (r#"{"z": [[0.1, 0.0]], "n": 2}"#, "n"),
        (r#"{"n": 0}"#, "n"),
        (r#"{"z": []}"#, "z"),
        (r#"{"samples": 0}"#, "samples"),
        (r#"{"schema_version": 9}"#, "schema_version"),
    ] {
        let cfg = write_config(&format!("bad-{field}.json"), body);
        let out = bin().args(["verify", "--config"]).arg(&cfg).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "config {body}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(
            err.contains(&format!("`{field}`")),
            "stderr {err:?} must name {field}"
        );
    }
}

#[test]
fn failed_checks_exit_one() {
    let cfg = write_config(
        "tight.json",
        r#"{"suite": "theta", "samples": 5, "tol": 1e-18}"#,
    );
    let out = bin().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["overall_pass"], false);
}

#[test]
fn flags_override_config() {
    let cfg = write_config(
        "override.json",
        r#"{"suite": "opalg", "samples": 40, "seed": 1}"#,
    );
    let out = bin()
        .args(["verify", "--suite", "theta", "--samples", "6", "--seed", "3", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let env = &report["environment"]["config"];
    assert_eq!(env["suite"], "theta");
    assert_eq!(env["samples"], 6);
    assert_eq!(env["seed"], 3);
    assert_eq!(report["checks"].as_array().unwrap().len(), 3);
}
