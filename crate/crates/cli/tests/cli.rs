use std::path::Path;
use std::process::{Command, Output};

fn adaprod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaprod"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const COMPARE: &str = r#"{
    "run_id": "cli",
    "learners": [{"algo": "adaprod_plus"}, {"algo": "greedy"}],
    "env": {"kind": "greedy_trap", "epsilon": 0.25},
    "batch": 1,
    "rounds": 20,
    "sleeping": false,
    "seeds": [1]
}"#;

#[test]
fn compare_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), COMPARE);
    let out = dir.path().join("out/rounds.csv");
    let res = adaprod(&["compare", "--config", &config, "--out", out.to_str().unwrap(), "--seeds", "3"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with(
        "run_id,algo,seed,round,mixture_loss,cum_regret_best_fixed,cum_regret_dynamic,n_labeled,cap_active"
    ));
    assert_eq!(csv.lines().count(), 1 + 2 * 3 * 20);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/rounds.summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["seeds"], serde_json::json!([0, 1, 2]));
}

#[test]
fn run_requires_a_single_learner() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), COMPARE);
    let res = adaprod(&["run", "--config", &config]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn run_prints_csv_without_an_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &COMPARE.replace(r#", {"algo": "greedy"}"#, ""));
    let res = adaprod(&["run", "--config", &config, "--threads", "1"]);
    assert!(res.status.success());
    assert_eq!(String::from_utf8_lossy(&res.stdout).lines().count(), 21);
}

#[test]
fn validate_reports_the_plan() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), COMPARE);
    let res = adaprod(&["validate", "--config", &config]);
    assert!(res.status.success());
    let plan: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(plan["n"], 3);
    assert_eq!(plan["rounds"], 20);
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &COMPARE.replace("\"batch\": 1", "\"batch\": 1, \"bogus\": 0"));
    assert_eq!(adaprod(&["validate", "--config", &config]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(
        adaprod(&["validate", "--config", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn bad_marginal_targets_exit_with_two() {
    // Targets must sum to an integer.
    assert_eq!(adaprod(&["marginals", "--probs", "0.5,0.2"]).status.code(), Some(2));
    assert_eq!(adaprod(&["marginals", "--probs", "1.5,0.5"]).status.code(), Some(2));
}

#[test]
fn negative_rates_are_rejected_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        &COMPARE.replace(r#"{"algo": "adaprod_plus"}"#, r#"{"algo": "adaprod_plus", "initial_rate": -1.0}"#),
    );
    assert_eq!(adaprod(&["compare", "--config", &config]).status.code(), Some(2));
}

#[test]
fn marginals_match_their_targets() {
    let res = adaprod(&["marginals", "--probs", "0.9,0.6,0.3,0.2", "--draws", "50000", "--seed", "4"]);
    assert!(res.status.success());
    let out: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(out["max_abs_deviation"].as_f64().unwrap() < 0.01);
}
