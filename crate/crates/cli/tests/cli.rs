use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subconv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn sp3_simulation_has_one_row_per_term() {
    let out = run(&["simulate", "--model", "sp3", "--k", "3", "--init", "1,1,1", "--steps", "300"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,x"));
    assert_eq!(lines.count(), 303);
}

#[test]
fn zero_initial_values_stay_zero() {
    let out = run(&["simulate", "--model", "sp3", "--k", "3", "--init", "0,0,0", "--steps", "10"]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().skip(1).all(|l| l.ends_with(",0")));
}

#[test]
fn adult_juvenile_rows() {
    let out = run(&[
        "simulate", "--model", "adult-juvenile", "--s", "0.8", "--t", "1", "--r", "2", "--lambda",
        "2", "--init", "1,1", "--steps", "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(cols[1], 0.8);
    assert!((cols[2] - 0.64 * 0.2f64.exp()).abs() < 1e-15);
}

#[test]
fn json_simulation_round_trips_through_config() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let out = run(&[
        "simulate", "--model", "adult-juvenile", "--s", "0.8:0.6", "--t", "1", "--r", "2",
        "--lambda", "2", "--init", "1,0.1", "--steps", "50", "--format", "json", "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let second = dir.path().join("second.json");
    let out = run(&[
        "simulate", "--config", first.to_str().unwrap(), "--format", "json", "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read_to_string(&first).unwrap();
    let b = std::fs::read_to_string(&second).unwrap();
    assert_eq!(a, b);
}

#[test]
fn experiment_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"schema":1,"model":{"family":"sp3","k":2},"initial":[1,1,1],"steps":97}"#,
    )
    .unwrap();
    let out = run(&["analyze", "--config", cfg.to_str().unwrap(), "--json"]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["crossing_index"], 25);
    assert_eq!(report["stride"], 2);
    assert_eq!(report["predictions"][0]["chain_verified"], true);
    assert!(report["predictions"][0]["window"].is_array());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"schema":1,"model":{"family":"sp3","k":2},"initial":[1,1,1],"stpes":9}"#,
    )
    .unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sp3_lag1_converges_from_crossing() {
    let out = run(&["analyze", "--model", "sp3", "--k", "1", "--init", "1,1,1", "--steps", "214", "--json"]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["full_convergence_from"], 14);
    assert_eq!(report["claim"], "informal");
}

#[test]
fn competition_global_convergence_batch() {
    let out = run(&[
        "analyze", "--model", "competition", "--r1", "1", "--a1", "1", "--b1", "0.5", "--r2", "1",
        "--a2", "1", "--delta1", "2", "--batch", "16", "--seed", "5", "--init-max", "10",
        "--steps", "200", "--json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let entries = json(&out);
    let entries = entries.as_array().unwrap();
    assert_eq!(entries.len(), 16);
    assert!(entries.iter().all(|e| e["full_convergence_from"] == 0 && e["violated"] == false));
}

#[test]
fn batch_is_reproducible_for_a_seed() {
    let args = [
        "analyze", "--model", "sp3", "--k", "2", "--batch", "8", "--seed", "3", "--steps", "150",
        "--json",
    ];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn thresholds() {
    let r = json(&run(&["threshold", "--model", "ricker", "--lambda", "1.5", "--a", "1.5", "--b", "0.9", "--json"]));
    let u_star = r["fixed_points"]["u_star"].as_f64().unwrap();
    let u_bar = r["fixed_points"]["u_bar"].as_f64().unwrap();
    assert!((u_star - 0.054964735256981326).abs() < 1e-15);
    assert!((u_bar - 2.0711758192373018).abs() < 1e-12);

    let t = json(&run(&["threshold", "--model", "ricker", "--lambda", "2", "--a", "1", "--b", "1", "--json"]));
    assert_eq!(t["fixed_points"]["kind"], "tangent");
    assert_eq!(t["fixed_points"]["u"], 1.0);

    let c = json(&run(&["threshold", "--model", "competition", "--r1", "3", "--a1", "2", "--delta1", "2", "--json"]));
    assert_eq!(c["threshold"]["alpha"], 1.0);
}

#[test]
fn unbounded_threshold_serializes_as_inf() {
    let c = json(&run(&["threshold", "--model", "competition", "--r1", "1", "--a1", "1", "--delta1", "2", "--json"]));
    assert_eq!(c["threshold"]["alpha"], "inf");
    assert_eq!(c["threshold"]["kind"], "unbounded");
}

#[test]
fn folds() {
    let out = run(&["fold", "--model", "adult-juvenile", "--s", "0.8", "--t", "1", "--r", "2", "--lambda", "2", "--json"]);
    assert!(out.status.success());
    let f = json(&out);
    assert_eq!(f["descriptor"]["family"], "adult-juvenile-fold");
    assert_eq!(f["consistency"]["passed"], true);

    let out = run(&[
        "fold", "--model", "threed", "--a", "1:1.3", "--p", "0.2", "--b", "0.1", "--c", "1",
        "--q", "1", "--r", "1.2", "--s", "0.9", "--json",
    ]);
    assert!(out.status.success());
    let f = json(&out);
    assert_eq!(f["order"], 3);
    assert_eq!(f["descriptor"]["family"], "threed-fold");
}

#[test]
fn fold_without_solvability_form() {
    let out = run(&["fold", "--model", "competition", "--r1", "1", "--a1", "1", "--r2", "1", "--a2", "1", "--delta1", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no solvability form"));
}

#[test]
fn blow_up_writes_partial_output() {
    let out = run(&[
        "simulate", "--model", "sigmoid-bh", "--a", "2", "--p", "3", "--b", "1", "--init", "5",
        "--steps", "40",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).lines().count() > 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stopped"));
}

#[test]
fn sublinearity_failure_is_bound_error() {
    let out = run(&[
        "analyze", "--model", "sigmoid-bh", "--a", "2", "--p", "1", "--b", "1", "--init", "1.2",
    ]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_errors() {
    assert_eq!(run(&["simulate", "--model", "nope", "--init", "1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--model", "sp3", "--init", "1,1"]).status.code(), Some(2));
    assert_eq!(run(&["threshold", "--model", "ricker", "--lambda", "1.5"]).status.code(), Some(2));
}

#[test]
fn models_listing() {
    let m = json(&run(&["models", "--json"]));
    let names: Vec<&str> = m.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"competition-swapped"));
    assert_eq!(names.len(), 7);
}
