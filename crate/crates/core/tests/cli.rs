use std::process::{Command, Output};

use serde_json::Value;

fn qdasim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdasim"))
        .args(args)
        .env_remove("QDASIM_SEED")
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(qdasim(&["--help"]).status.code(), Some(0));
    assert_eq!(qdasim(&["reduce", "--help"]).status.code(), Some(0));
    assert_eq!(qdasim(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qdasim(&["reduce"]).status.code(), Some(1));
    assert_eq!(qdasim(&["reduce", "--synthetic", "nope"]).status.code(), Some(1));
    assert_eq!(qdasim(&["reduce", "--data", "/nonexistent.csv"]).status.code(), Some(1));
    assert_eq!(qdasim(&["classify", "--train", "a.csv"]).status.code(), Some(1));
}

#[test]
fn domain_errors_exit_two() {
    // two classes give a rank-one between-class scatter, so p = 2 is out of reach
    let out = qdasim(&["reduce", "--synthetic", "two-gauss", "--p", "2", "--path", "classical"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_then_reduce_and_classify_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let test = dir.path().join("test.csv");
    let r = report(&qdasim(&["gen", "--preset", "three-gauss", "--per-class", "40", "--csv", train.to_str().unwrap()]));
    assert_eq!(r["metrics"]["samples"], 120);
    report(&qdasim(&["gen", "--preset", "three-gauss", "--per-class", "10", "--seed", "2", "--csv", test.to_str().unwrap()]));

    let r = report(&qdasim(&["reduce", "--data", train.to_str().unwrap(), "--p", "2"]));
    let overlaps = r["metrics"]["direction_overlaps"].as_array().unwrap();
    assert_eq!(overlaps.len(), 2);
    assert!(overlaps.iter().all(|c| c.as_f64().unwrap() > 0.99));
    assert_eq!(r["metrics"]["copies_used"].as_array().unwrap().len(), 2);

    let out_path = dir.path().join("classify.json");
    let out = qdasim(&[
        "classify", "--train", train.to_str().unwrap(), "--test", test.to_str().unwrap(),
        "--shots", "4096", "--output", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(r["metrics"]["agreement"].as_f64().unwrap() >= 0.95);
    assert_eq!(r["metrics"]["shots_used"], 4096 * 30 * 3);
    assert_eq!(r["outputs"]["quantum"]["decisions"].as_array().unwrap().len(), 30);
}

#[test]
fn missing_test_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    report(&qdasim(&["gen", "--csv", train.to_str().unwrap()]));
    let out = qdasim(&["classify", "--train", train.to_str().unwrap(), "--test", "/no/such/file.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn chain_from_operator_file() {
    let dir = tempfile::tempdir().unwrap();
    let ops = dir.path().join("ops.json");
    std::fs::write(
        &ops,
        r#"{"operators":[{"re":[[2,0],[0,1]]}],"functions":["inverse"]}"#,
    )
    .unwrap();
    let r = report(&qdasim(&["chain", "--operators", ops.to_str().unwrap()]));
    assert!(r["metrics"]["trace_distance"].as_f64().unwrap() < 0.05);
    // A⁻¹ρA⁻† with ρ = I/2 is diag(1/4, 1), normalized to diag(0.2, 0.8)
    let re = &r["outputs"]["classical_output"]["re"];
    assert!((re[0][0].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert_eq!(r["metrics"]["copies_used"][0], 4000);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"operators":[{"re":[[1,2],[0,1]]}],"functions":["sqrt"]}"#).unwrap();
    assert_eq!(qdasim(&["chain", "--operators", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn rotate_check_passes_by_default_and_fails_with_short_series() {
    let r = report(&qdasim(&["rotate-check"]));
    assert_eq!(r["metrics"]["within_bound"], true);
    let tail = &r["metrics"]["arcsin_tail_at_0.9"];
    assert!(tail["error_doubled_terms"].as_f64().unwrap() < tail["error"].as_f64().unwrap());
    let r = report(&qdasim(&["rotate-check", "--arcsin-terms", "2"]));
    assert_eq!(r["metrics"]["within_bound"], false);
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qdasim"))
        .args(["rotate-check"])
        .env("QDASIM_SEED", "42")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["seed"], 42);
}
