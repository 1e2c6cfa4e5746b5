use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tbrw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbrw")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classify_bernoulli() {
    let o = tbrw(&["classify-env", "--family", "bernoulli", "--p", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("UE ✓ (κ=0.5)"), "{text}");
    assert!(text.contains("S ✓"), "{text}");
    assert!(text.contains("I ✗"), "{text}");
}

#[test]
fn classify_json() {
    let o = tbrw(&["classify-env", "--family", "geometric", "--mean", "2", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ue"]["status"], "holds");
}

#[test]
fn unknown_subcommand_exits_two_with_usage() {
    let o = tbrw(&["teleport"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn invalid_parameters_exit_two() {
    let o = tbrw(&["speed", "--family", "bernoulli", "--p", "1.5", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tbrw(&["speed", "--family", "bernoulli", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2), "missing seed");
    let o = tbrw(&["trap", "--family", "constant", "--c", "1", "--seed", "1", "--horizon", "10", "--window", "6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = tbrw(&[
        "simulate", "--family", "constant", "--c", "1", "--horizon", "10", "--seed", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = tbrw(&[
            "simulate", "--s", "2", "--family", "constant", "--c", "1", "--horizon", "1000", "--seed", "7",
            "--replicas", "4", "--workers", workers, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["aggregate.json", "replicas.jsonl", "trajectories.jsonl"] {
        assert_eq!(read(&a, name), read(&b, name), "{name} differs");
    }
    let lines = String::from_utf8(read(&a, "trajectories.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 4 * 1001);
    let meta: serde_json::Value = serde_json::from_slice(&read(&a, "run.json")).unwrap();
    assert_eq!(meta["config"]["seed"], 7);
    assert!(meta["wall_clock_seconds"].is_number());
}

#[test]
fn exit_scaling_table_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = tbrw(&[
        "exit-scaling", "--k", "1", "--family", "bernoulli", "--p", "0.5", "--ells", "10,100,1000", "--seed", "3",
        "--replicas", "50", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(read(dir.path(), "table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("ell,"));
    let agg: serde_json::Value = serde_json::from_slice(&read(dir.path(), "aggregate.json")).unwrap();
    assert_eq!(agg["kind"], "exit_scaling");
    assert!(agg["report"]["fit"]["slope"].as_f64().unwrap() > 0.0);
    let printed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, agg);
}

#[test]
fn config_file_takes_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema": 1, "kind": "speed", "s": 1, "horizon": 200, "stride": 50,
            "env": {"family": "constant", "c": 1}, "replicas": 3, "seed": 11}"#,
    )
    .unwrap();
    let o = tbrw(&["speed", "--config", cfg.to_str().unwrap(), "--seed", "99", "--replicas", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["replicas"], 3);
    assert_eq!(v["report"]["horizon"], 200);

    let o = tbrw(&["trap", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "kind mismatch");

    fs::write(&cfg, "{not json").unwrap();
    let o = tbrw(&["speed", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_horizon_is_empty_and_succeeds() {
    let o = tbrw(&["speed", "--family", "constant", "--c", "1", "--horizon", "0", "--replicas", "1", "--seed", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["report"].is_null());
}
