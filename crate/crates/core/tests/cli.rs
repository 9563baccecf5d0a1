mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::manifest_path;

fn avgsample(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avgsample")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    manifest_path(&format!("configs/{name}.json")).to_string_lossy().into_owned()
}

fn run_ok(args: &[&str]) -> Output {
    let out = avgsample(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

#[test]
fn table_csv_layout_and_stamp() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    run_ok(&["table", "--config", &config("table1"), "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(
        header(&out),
        ["n", "m", "rank", "full_rank", "linf_error", "l1_error", "l2_error", "residual", "row_seed", "config_hash", "seed"]
    );
    let mut r = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert_eq!(&row[10], "7");
        assert_eq!(row[9].len(), 64);
    }
}

#[test]
fn seed_changes_samples_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    let cfg = config("table2");
    run_ok(&["samples", "--config", &cfg, "--out", &path("a.csv")]);
    run_ok(&["samples", "--config", &cfg, "--out", &path("b.csv")]);
    run_ok(&["samples", "--config", &cfg, "--out", &path("c.csv"), "--seed", "1"]);
    let read = |n: &str| std::fs::read(path(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
    assert_eq!(header(Path::new(&path("a.csv"))), ["j", "k", "x", "y1", "config_hash", "seed"]);
}

#[test]
fn constants_json_carries_every_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let stdout = run_ok(&["constants", "--theorem", "thm1", "--config", &config("table1"), "--out", out.to_str().unwrap()]);
    assert!(!stdout.stdout.is_empty());
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(json["theorem"], "thm1");
    assert!(json["config_hash"].is_string());
    assert_eq!(json["seed"], 20240501);
    for key in ["gamma", "omega", "A_gamma_omega", "B_gamma_omega", "nm_min", "c_star", "ln_A1", "A1", "beta1", "ln_A2", "A2", "beta2"] {
        assert!(json["constants"].get(key).is_some(), "missing {key}");
    }
    assert!(json["ln_failure_bound"].is_number());
}

#[test]
fn sweep_writes_records_and_trials() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.jsonl");
    run_ok(&["sweep", "--config", &config("table1"), "--out", out.to_str().unwrap(), "--nm", "9,25", "--trials", "10"]);
    let records = std::fs::read_to_string(&out).unwrap();
    assert_eq!(records.lines().count(), 2);
    let first: serde_json::Value = serde_json::from_str(records.lines().next().unwrap()).unwrap();
    assert_eq!(first["nm"], 9);
    assert!(first["theory"]["thm4"].is_object());
    let trials = std::fs::read_to_string(out.with_extension("trials.jsonl")).unwrap();
    assert_eq!(trials.lines().count(), 20);
}

#[test]
fn strict_flags_rank_deficiency_and_errors_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = std::fs::read_to_string(config("table1")).unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&cfg_text).unwrap();
    cfg["sample_sizes"] = serde_json::json!([[2, 2]]);
    let cfg_path = dir.path().join("small.json");
    std::fs::write(&cfg_path, serde_json::to_vec(&cfg).unwrap()).unwrap();
    let out = dir.path().join("t.csv");
    let args = ["table", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert!(avgsample(&args).status.success());
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(avgsample(&strict).status.code(), Some(2));

    assert_eq!(avgsample(&["table"]).status.code(), Some(1));
    cfg["unknown_field"] = serde_json::json!(1);
    std::fs::write(&cfg_path, serde_json::to_vec(&cfg).unwrap()).unwrap();
    assert_eq!(avgsample(&args).status.code(), Some(1));
}
