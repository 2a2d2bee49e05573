use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn feedaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feedaudit"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const CONFIG: &str = r#"{
  "publishers": [{"id": "left", "rate": 1.0}, {"id": "right", "rate": 1.0}],
  "bots": [{"id": "bot", "acceptance": {"left": 1.0, "right": 0.25}}],
  "k": 3,
  "snapshot_interval": 5.0,
  "snapshot_count": 400,
  "seed": 1
}"#;

fn simulate(dir: &Path, seed: &str) -> std::path::PathBuf {
    let config = dir.join("config.json");
    fs::write(&config, CONFIG).unwrap();
    let out = dir.join(format!("data-{seed}"));
    let run = feedaudit(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        seed,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    out
}

#[test]
fn simulate_writes_four_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let first = simulate(dir.path(), "42");
    let config = dir.path().join("config.json");
    let again = dir.path().join("again");
    let run = feedaudit(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "42",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    for file in ["snapshots.jsonl", "catalog.jsonl", "truth.csv", "manifest.json"] {
        assert_eq!(
            fs::read(first.join(file)).unwrap(),
            fs::read(again.join(file)).unwrap(),
            "{file}"
        );
    }
    let manifest = fs::read_to_string(first.join("manifest.json")).unwrap();
    assert!(manifest.contains("seed=42"));
}

#[test]
fn analysis_subcommands_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "7");
    let snapshots = data.join("snapshots.jsonl");
    let catalog = data.join("catalog.jsonl");
    let s = snapshots.to_str().unwrap();
    let out = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let run = feedaudit(&["metrics", "--snapshots", s, "--k", "3", "--out", &out("m.csv")]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let metrics = fs::read_to_string(out("m.csv")).unwrap();
    assert!(metrics.starts_with("bot_id,publisher_id,k,occupancy,visibility"));
    assert_eq!(metrics.lines().count(), 3);

    let run = feedaudit(&["validate", "--snapshots", s, "--k", "3", "--out", &out("v.csv")]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(String::from_utf8_lossy(&run.stdout).contains("max_abs_deviation="));

    let bias = |seed: &str, name: &str| {
        feedaudit(&[
            "bias",
            "--snapshots",
            s,
            "--catalog",
            catalog.to_str().unwrap(),
            "--replicates",
            "100",
            "--seed",
            seed,
            "--out",
            &out(name),
        ])
    };
    assert_eq!(code(&bias("3", "b1.csv")), 0);
    assert_eq!(code(&bias("3", "b2.csv")), 0);
    assert_eq!(fs::read(out("b1.csv")).unwrap(), fs::read(out("b2.csv")).unwrap());
    assert!(fs::read_to_string(out("b1.csv")).unwrap().contains("ci_low,ci_high"));

    let run = feedaudit(&["curve", "--snapshots", s, "--k-max", "3", "--out", &out("c.csv")]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert_eq!(fs::read_to_string(out("c.csv")).unwrap().lines().count(), 1 + 2 * 3);
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let data = simulate(dir.path(), "5");
    let s = data.join("snapshots.jsonl");
    let c = data.join("catalog.jsonl");
    let out = dir.path().join("x.csv");

    let run = feedaudit(&[
        "metrics",
        "--snapshots",
        s.to_str().unwrap(),
        "--k",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 1);
    assert!(stderr(&run).contains("K must be ≥ 1"));

    let run = feedaudit(&[
        "bias",
        "--snapshots",
        s.to_str().unwrap(),
        "--catalog",
        c.to_str().unwrap(),
        "--level",
        "1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 1);
    assert!(!out.exists());

    let bad = dir.path().join("bad.jsonl");
    fs::write(
        &bad,
        "{\"bot_id\":\"b\",\"snapshot_time\":\"yesterday\",\"entries\":[]}\n",
    )
    .unwrap();
    let run = feedaudit(&[
        "metrics",
        "--snapshots",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 1);
    assert!(stderr(&run).contains("snapshot_time"), "{}", stderr(&run));
}

#[test]
fn io_errors_exit_2() {
    let run = feedaudit(&[
        "simulate",
        "--config",
        "/nonexistent/config.json",
        "--out",
        "/tmp/unused",
    ]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("/nonexistent/config.json"));
}

#[test]
fn usage() {
    assert_eq!(code(&feedaudit(&["--help"])), 0);
    assert_eq!(code(&feedaudit(&["bias", "--help"])), 0);
    assert_eq!(code(&feedaudit(&["metrics"])), 1);
    assert_eq!(code(&feedaudit(&["frobnicate"])), 1);
}
