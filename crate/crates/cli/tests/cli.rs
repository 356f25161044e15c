use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bsg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsg")).args(args).output().expect("binary runs")
}

fn gen(dir: &Path, name: &str, seed: &str) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let out = bsg(&["gen", "--m", "2", "--n", "2", "-K", "1", "-L", "4", "--seed", seed, "--out", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.json", "1");
    let b = gen(dir.path(), "b.json", "1");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(bsg(&["verify", "--instance", &a]).status.code(), Some(0));
}

#[test]
fn zero_types_is_a_usage_error() {
    let out = bsg(&["gen", "--m", "2", "--n", "2", "-K", "0", "-L", "4", "--out", "unused.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--types"));
}

#[test]
fn verify_rejects_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = fs::read_to_string(gen(dir.path(), "g.json", "1")).unwrap();

    let zero_den = dir.path().join("zero.json");
    fs::write(&zero_den, good.replacen("\"1/2\"", "\"3/0\"", 1)).unwrap();
    let out = bsg(&["verify", "--instance", zero_den.to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    v["mu"] = serde_json::json!(["1/2"]);
    let off = dir.path().join("mu.json");
    fs::write(&off, v.to_string()).unwrap();
    let out = bsg(&["verify", "--instance", off.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("mu sums to 1/2"));
}

#[test]
fn run_writes_one_row_per_round_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", "3");
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = bsg(&[
            "run",
            "--instance",
            &inst,
            "--rounds",
            "400",
            "--seeds",
            "5",
            "--white-box",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (
            fs::read(out_dir.join("seed_5.csv")).unwrap(),
            fs::read(out_dir.join("seed_5.json")).unwrap(),
        )
    };
    let (csv, json) = run("first");
    assert_eq!(String::from_utf8_lossy(&csv).lines().count(), 401);
    assert_eq!(run("second"), (csv, json));
    let out = bsg(&["report", "--out-dir", dir.path().join("first").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).lines().nth(1).unwrap().starts_with("5\t400\t"));
}

#[test]
fn action_feedback_runs_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "i.json", "1");
    let out_dir = dir.path().join("o");
    let out = bsg(&[
        "run",
        "--instance",
        &inst,
        "--rounds",
        "10",
        "--feedback",
        "action",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exponential in the bit complexity"));
}

#[test]
fn float_delta_is_rejected() {
    let out = bsg(&["run", "--instance", "x.json", "--rounds", "1", "--delta", "0.1", "--out-dir", "o"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lowerbound_small_family() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("lb.json");
    let out = bsg(&["lowerbound", "--bits", "1", "--rounds", "50", "--trials", "8", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v["cells_verified"], 4);
    assert_eq!(v["demo"]["misses"], 0);
}
