//! The `gdopt` binary end to end.

use std::path::PathBuf;
use std::process::{Command, Output};

fn gdopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdopt"))
        .args(args)
        .output()
        .expect("spawn gdopt")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gdopt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn without_time(mut v: serde_json::Value) -> serde_json::Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn run_is_deterministic_apart_from_wall_time() {
    let args = ["run", "polynomial", "--heuristic", "smear", "--epsilon", "1e-2"];
    let a = json(&gdopt(&args));
    let b = json(&gdopt(&args));
    assert_eq!(without_time(a.clone()), without_time(b));
    assert_eq!(a["status"], "completed");
    assert!(a["branch_count"].as_u64().unwrap() > 0);
}

#[test]
fn exported_file_solves_like_the_builtin() {
    let path = tmp("linear_growth.toml");
    let export = gdopt(&["export", "linear_growth", "--out", path.to_str().unwrap()]);
    assert!(export.status.success());
    let from_file = json(&gdopt(&["run", path.to_str().unwrap(), "--epsilon", "1e-3"]));
    let builtin = json(&gdopt(&["run", "linear_growth", "--epsilon", "1e-3"]));
    assert_eq!(from_file["branch_count"], builtin["branch_count"]);
    assert_eq!(from_file["csol"], builtin["csol"]);
}

#[test]
fn syntax_errors_exit_with_code_3() {
    let path = tmp("broken.toml");
    std::fs::write(&path, "states = 1\nparams = 1\nrhs = [\"p1 * (y1 +\"]\ninitial_state = [0]\ntspan = [0, 1]\nparameter_box = [[0, 1]]\n[cost]\nphi = \"y1^2\"\n").unwrap();
    let out = gdopt(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_and_io_errors_have_distinct_codes() {
    assert_eq!(
        gdopt(&["run", "polynomial", "--heuristic", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(gdopt(&["run", "polynomial", "--epsilon", "-1"]).status.code(), Some(2));
    assert_eq!(gdopt(&["run", "/nonexistent/problem.toml"]).status.code(), Some(1));
}

#[test]
fn branch_limit_exits_with_code_5_and_still_reports() {
    let out = gdopt(&["run", "polynomial", "--epsilon", "1e-4", "--max-branches", "3"]);
    assert_eq!(out.status.code(), Some(5));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "branch_limit");
}

#[test]
fn bench_reports_one_row_per_heuristic() {
    let out = gdopt(&["bench", "polynomial", "--epsilons", "1e-2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // header plus one row per heuristic
    assert_eq!(text.lines().count(), 3, "{text}");
}

#[test]
fn events_stream_is_json_lines() {
    let path = tmp("events.jsonl");
    let out = gdopt(&[
        "run",
        "linear_growth",
        "--epsilon",
        "1e-2",
        "--events",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let kinds: Vec<String> = text
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["event"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(kinds.first().map(String::as_str), Some("node_popped"));
    assert!(kinds.iter().any(|k| k == "bisected"));
}

#[test]
fn flow_writes_csv() {
    let out = gdopt(&["flow", "linear_growth", "--point", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,y1_lo,y1_hi"));
}
