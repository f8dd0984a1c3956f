use std::path::Path;
use std::process::{Command, Output};

fn imbalkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imbalkit"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .unwrap()
}

const CONFIG: &str = r#"
out = "results"
folds = 3
methods = ["base", "rus"]

[[datasets]]
name = "blobs"
synthetic = { n = 150, d = 3, ir = 5.0, seed = 2 }

[[datasets]]
path = "small.csv"
"#;

fn small_csv() -> String {
    let mut s = String::from("f1,f2,color,label\n");
    for i in 0..60 {
        let pos = i % 6 == 0;
        let color = ["red", "green", "blue"][i % 3];
        s.push_str(&format!("{},{},{color},{}\n", i as f64 * 0.1 + if pos { 3.0 } else { 0.0 }, i % 7, if pos { "yes" } else { "no" }));
    }
    s
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), CONFIG).unwrap();
    std::fs::write(dir.path().join("small.csv"), small_csv()).unwrap();
    let out = imbalkit(dir.path(), &["run", "--config", "c.toml", "--jobs", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records = std::fs::read_to_string(dir.path().join("results/records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 12);
    assert!(dir.path().join("results/records.index").exists());

    let out = imbalkit(dir.path(), &["report", "--in", "results", "--group-ir"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let md = std::fs::read_to_string(dir.path().join("results/report.md")).unwrap();
    assert!(md.contains("| method | [0,5) | [5,10) | [10,50) | [50,1000) |"));
    for f in ["scores.csv", "ranks.csv", "win_ratio.csv", "runtime.csv"] {
        assert!(dir.path().join("results").join(f).exists(), "{f}");
    }
}

#[test]
fn seed_and_out_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), CONFIG.replace("[[datasets]]\npath = \"small.csv\"\n", "")).unwrap();
    let out = imbalkit(dir.path(), &["run", "--config", "c.toml", "--seed", "9", "--out", "other", "--jobs", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records = std::fs::read_to_string(dir.path().join("other/records.jsonl")).unwrap();
    assert!(records.lines().all(|l| l.contains("\"seed\":9")));
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "methods = [\"base\"]\nfolds = \"five\"\n").unwrap();
    let out = imbalkit(dir.path(), &["run", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("folds"), "{err}");

    std::fs::write(dir.path().join("bad2.toml"), "methods = [\"smoteish\"]\n[[datasets]]\npath = \"x.csv\"\n").unwrap();
    let out = imbalkit(dir.path(), &["run", "--config", "bad2.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("smoteish"));
}

#[test]
fn unknown_flag_prints_usage_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = imbalkit(dir.path(), &["run", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(imbalkit(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn failed_jobs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "methods = [\"base\"]\n[[datasets]]\npath = \"absent.csv\"\n").unwrap();
    let out = imbalkit(dir.path(), &["run", "--config", "c.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let records = std::fs::read_to_string(dir.path().join("bench-out/records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 5);
    assert!(records.lines().all(|l| l.contains("\"status\":\"failed\"")));
}

#[test]
fn perturb_sweep_and_tune() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
folds = 2
methods = ["base", "nm"]
[[datasets]]
synthetic = { n = 120, d = 2, ir = 3.0, seed = 1 }
[[perturb]]
kind = "missing"
levels = [0.2]
[tune]
budget = 2
patience = 2
"#;
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let out = imbalkit(dir.path(), &["perturb-sweep", "--config", "c.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("bench-out/perturbation.md")).unwrap();
    assert!(table.contains("| missing@0.2 | nm |"), "{table}");

    let out = imbalkit(dir.path(), &["tune", "--config", "c.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("bench-out/tune/summary.jsonl")).unwrap();
    assert_eq!(summary.lines().count(), 1);
    assert!(summary.contains("\"method\":\"nm\""));

    std::fs::write(dir.path().join("plain.toml"), "methods = [\"base\"]\n[[datasets]]\nsynthetic = { n = 60, d = 2, ir = 2.0 }\n").unwrap();
    assert_eq!(imbalkit(dir.path(), &["perturb-sweep", "--config", "plain.toml"]).status.code(), Some(2));
}
