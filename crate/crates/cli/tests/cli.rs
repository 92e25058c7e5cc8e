use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kvisits(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kvisits")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_two_two_and_verify_the_emitted_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "d.json", r#"{"variant":"kvisits","k":2,"deadlines":[2,2]}"#);
    let sched = dir.path().join("s.json");
    let o = kvisits(&["solve", "--variant", "2v", "--algo", "auto", "--in", &inst, "--emit-schedule", sched.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{o:?}");
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["outcome"]["verdict"], "feasible");
    let o = kvisits(&["verify", "--in", &inst, "--schedule", sched.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn infeasible_and_rejected_inputs_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let no = write(dir.path(), "no.json", r#"{"variant":"kvisits","k":2,"deadlines":[1,2]}"#);
    assert_eq!(code(&kvisits(&["solve", "--in", &no])), 1);
    let bad = write(dir.path(), "bad.json", "{\"variant\": \"kvisits\",\n \"deadlines\": [1,]}");
    let o = kvisits(&["solve", "--in", &bad]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(code(&kvisits(&["generate", "nothing"])), 3);
    assert_eq!(code(&kvisits(&["solve", "--algo", "randomized", "--in", &no])), 3);
}

#[test]
fn plain_schedule_that_misses_a_deadline_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "d.json", r#"{"variant":"kvisits","k":2,"deadlines":[2,2]}"#);
    let s = write(
        dir.path(),
        "s.json",
        r#"{"entries":[{"pos":1,"task":1,"role":"plain"},{"pos":2,"task":1,"role":"plain"},{"pos":3,"task":2,"role":"plain"},{"pos":4,"task":2,"role":"plain"}]}"#,
    );
    let o = kvisits(&["verify", "--in", &inst, "--schedule", &s]);
    assert_eq!(code(&o), 1);
}

#[test]
fn counterexample_report() {
    let o = kvisits(&["oracle", "counterexample-3v"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["schedule_verifies"], true);
    assert_eq!(r["distinct_positions"]["feasible"], false);
    assert_eq!(r["sorted_first_visits"]["feasible"], false);
}

#[test]
fn reduce_with_oracle_prints_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let nmts = write(dir.path(), "n.json", r#"{"a":[1,2],"b":[1,3],"t":[2,5]}"#);
    let out = dir.path().join("pm.json");
    let o = kvisits(&["reduce", "--chain", "nmts:pm", "--in", &nmts, "--out", out.to_str().unwrap(), "--verify-with-oracle", "--format", "text"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let table = stdout(&o);
    for stage in ["nmts", "srnmts", "in3dm", "in3dm_shifted", "pm"] {
        assert!(table.lines().any(|l| l.starts_with(stage) && l.ends_with("yes")), "{table}");
    }
    assert_eq!(code(&kvisits(&["solve", "--in", out.to_str().unwrap()])), 0);
}

#[test]
fn generators() {
    assert_eq!(stdout(&kvisits(&["generate", "worstcase", "--j", "2", "--dj", "4"])).trim(), r#"{"variant":"kvisits","k":2,"deadlines":[4,4,7,7,7,7]}"#);
    assert_eq!(stdout(&kvisits(&["generate", "pinwheelno", "--x", "2"])).trim(), r#"{"variant":"kvisits","k":13,"deadlines":[2,2,3]}"#);
    let a = kvisits(&["generate", "random", "--n", "6", "--seed", "7"]);
    let b = kvisits(&["generate", "random", "--n", "6", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&kvisits(&["generate", "random", "--n", "6"])), 3);
}

#[test]
fn density_sweep_is_identical_across_worker_counts() {
    let args = ["density", "--sweep", "--count", "60", "--max-n", "20", "--seed", "9"];
    let one = kvisits(&args);
    let mut more = args.to_vec();
    more.extend(["--workers", "3"]);
    let three = kvisits(&more);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, three.stdout);
    let text = stdout(&one);
    assert_eq!(text.lines().count(), 61);
    assert!(text.starts_with("instance_hash,n,density,claim_ok,scheduled_ok"));
}

#[test]
fn randomized_solve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "d.json", r#"{"variant":"kvisits","k":2,"deadlines":[3,3,5,5,6,6]}"#);
    let args = ["solve", "--algo", "randomized", "--seed", "4", "--trials", "3", "--in", &inst];
    let a = kvisits(&args);
    assert_eq!(a.stdout, kvisits(&args).stdout);
    let r: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(r["seed"], 4);
    assert_eq!(r["field_modulus"], 2305843009213693951u64);
}

#[test]
fn caps_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "d.json", r#"{"variant":"kvisits","k":13,"deadlines":[2,2,3]}"#);
    let o = Command::new(env!("CARGO_BIN_EXE_kvisits"))
        .args(["oracle", "decide", "--in", &inst])
        .env("KVISITS_STATE_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "{o:?}");
    assert_eq!(code(&kvisits(&["oracle", "decide", "--in", &inst])), 1);
}

#[test]
fn discretize_prints_sequence_clusters_and_targets() {
    let o = kvisits(&["discretize", "--deadlines", "3,5,5,7,7,7,15,15,16"]);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["a"], serde_json::json!([2, 3, 4, 5, 6, 7, 14, 15, 16]));
    assert_eq!(r["clusters"].as_array().unwrap().len(), 2);
}
