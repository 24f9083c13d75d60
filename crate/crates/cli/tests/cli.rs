use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

/// Brute-force minimum over all layer groupings of the bundled function,
/// evaluated with 40-digit arithmetic.
const THREE_LAYER_UPPER: f64 = 4.300208815257326;

fn qaspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaspace"))
        .args(args)
        .env_remove("QASPACE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn json_ok(args: &[&str]) -> Value {
    let out = qaspace(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn qa_bounds_golden_value() {
    let v = json_ok(&["qa-bounds", "--input", &data("three_layer.json")]);
    let upper = v["upper"].as_f64().unwrap();
    assert!((upper - THREE_LAYER_UPPER).abs() <= 1e-14 * THREE_LAYER_UPPER, "{upper}");
    assert_eq!(v["strategy"], "exhaustive");
    assert!(v["lower"].as_f64().unwrap() <= upper);
    assert_eq!(v["config"]["phi"]["family"], "qa_phi");
    assert!(v["witness"].as_array().is_some_and(|w| !w.is_empty()));
}

#[test]
fn strategies_by_name() {
    let input = data("three_layer.json");
    let mut uppers = Vec::new();
    for s in ["exhaustive", "local", "layers", "singleton"] {
        let v = json_ok(&["qa-bounds", "--input", &input, "--strategy", s]);
        uppers.push(v["upper"].as_f64().unwrap());
    }
    assert!(uppers.windows(2).all(|w| w[0] <= w[1]), "{uppers:?}");
}

#[test]
fn unknown_strategy_is_a_usage_error() {
    let out = qaspace(&["qa-bounds", "--input", &data("three_layer.json"), "--strategy", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["error"], "unknown_strategy");
}

#[test]
fn bad_specs_and_flags_exit_2() {
    assert_eq!(qaspace(&["tau", "--bogus"]).status.code(), Some(2));
    let out = qaspace(&["tau", "--phi", r#"{"family":"nope"}"#]);
    assert_eq!(out.status.code(), Some(2));
    let out = qaspace(&["rearrange", "--input", r#"{"breakpoints":[0,0.7,0.5,1],"values":[1,2,3]}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn tau_csv_schema() {
    let out = qaspace(&["tau", "--tmin", "1e-12", "--tmax", "1", "--points", "200"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let config: Value = serde_json::from_str(lines.next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(config["points"], 200);
    assert_eq!(lines.next(), Some("t,tau,phi,ratio"));
    let ts: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ts.len(), 200);
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    assert_eq!((ts[0], ts[199]), (1e-12, 1.0));
}

#[test]
fn lorentz_norm_hand_value() {
    let v = json_ok(&["lorentz-norm", "--input", r#"{"breakpoints":[0,0.5,1],"values":[2,1]}"#]);
    let expect = 0.5 * (1.0 + 2f64.ln()) + 1.0;
    assert!((v["value"].as_f64().unwrap() - expect).abs() < 1e-15);
}

#[test]
fn rearrange_round_trips() {
    let v = json_ok(&["rearrange", "--input", &data("three_layer.json")]);
    let star: qaspace::StepFunction = serde_json::from_value(v["rearranged"].clone()).unwrap();
    let f = qaspace::StepFunction::from_json(&std::fs::read_to_string(data("three_layer.json")).unwrap()).unwrap();
    assert_eq!(star, f.rearrange());
}

#[test]
fn witness_report() {
    let v = json_ok(&["witness", "--N", "4", "--c", "0.5", "--p", "1"]);
    assert_eq!(v["log_mu"].as_array().unwrap().len(), 8);
    assert_eq!(v["passed"], true);
    let (upper, bound) = (v["qa_upper"].as_f64().unwrap(), v["lower_bound"].as_f64().unwrap());
    assert!(upper >= bound);
    assert_eq!(v["config"]["spec"]["N"], 4);
}

#[test]
fn illegal_witness_spec() {
    let out = qaspace(&["witness", "--N", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn omega_shrinking_candidate() {
    let v = json_ok(&["omega", "--candidate", r#"{"kind":"gamma_power","theta":0.9}"#]);
    let scaled: Vec<f64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["omega_over_psi_N"].as_f64().unwrap())
        .collect();
    assert_eq!(scaled.len(), 7);
    assert!(scaled.windows(2).all(|w| w[1] < w[0]));
    let same = json_ok(&["omega"]);
    assert!(same["rows"].as_array().unwrap().iter().all(|r| r["omega"] == 1.0));
}

#[test]
fn check_seq_and_equivalence() {
    let v = json_ok(&["check-seq", "--psi", r#"{"family":"constant_one"}"#, "--seq", r#"{"kind":"reciprocal"}"#]);
    assert_eq!(v["all_passed"], true);
    let v = json_ok(&[
        "equivalence",
        "--a",
        r#"{"curve":"alpha_s","seq":{"kind":"gamma_exp"}}"#,
        "--b",
        r#"{"curve":"tau"}"#,
    ]);
    assert_eq!(v["spread"], 1.0);
    assert_eq!(v["equivalent"], true);
}

#[test]
fn selftest_is_deterministic() {
    let a = qaspace(&["selftest", "--seed", "7"]);
    let b = qaspace(&["selftest", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["all_passed"], true);
    assert!(v["families"].as_array().unwrap().len() >= 10);
}

#[test]
fn output_directory_from_environment() {
    let dir = std::env::temp_dir().join(format!("qaspace-cli-test-{}", std::process::id()));
    let out = Command::new(env!("CARGO_BIN_EXE_qaspace"))
        .args(["tau", "--points", "5", "--output", "curves/tau.csv"])
        .env("QASPACE_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.join("curves/tau.csv")).unwrap();
    assert_eq!(text.lines().count(), 7);
    std::fs::remove_dir_all(dir).unwrap();
}
