//! End-to-end checks of the command-line interface: output shapes, exit
//! codes, and the problem-file path.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_caputo-bvp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn solve_tp1_writes_csv_with_error_column() {
    let out = run(&["solve", "tp1", "--delta", "1.4", "--N", "64"]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines[0], "x,u_numeric,u_exact,error");
    assert_eq!(lines.len(), 66); // header + 65 nodes
    assert!(lines[1].starts_with("0.00000E+000,"));
}

#[test]
fn solve_tp2_has_no_error_column() {
    let out = run(&["solve", "tp2", "--delta", "1.3", "--N", "128"]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines[0], "x,u_numeric");
    assert_eq!(lines.len(), 130);
}

#[test]
fn solve_rejects_inadmissible_alpha0_with_exit_2() {
    let out = run(&["solve", "tp1", "--delta", "1.4", "--N", "64", "--alpha0", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha0"), "stderr: {err}");
    assert!(err.contains("1/(delta-1)"), "stderr: {err}");
}

#[test]
fn solve_rejects_delta_out_of_range_with_exit_2() {
    let out = run(&["solve", "tp1", "--delta", "2.4", "--N", "64"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_json_format_parses() {
    let out = run(&["solve", "tp1", "--delta", "1.5", "--N", "16", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["x"].as_array().unwrap().len(), 17);
    assert!(doc["u_exact"].is_array());
    assert!(doc["error"].is_array());
}

#[test]
fn solve_forward_solver_flag_matches_lu() {
    let a = run(&["solve", "tp2", "--delta", "1.7", "--N", "64", "--solver", "lu"]);
    let b = run(&["solve", "tp2", "--delta", "1.7", "--N", "64", "--solver", "forward"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_admissible_problem_exits_zero_with_json_report() {
    let out = run(&["verify", "tp1", "--delta", "1.2", "--N", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["m_matrix"], serde_json::Value::Bool(true));

    let out = run(&["verify", "tp2", "--delta", "1.9", "--N", "256"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_stops_at_validation_with_exit_2() {
    let path = write_problem_file(
        "verify_bad_alpha0",
        r#"{
            "delta": 1.5,
            "b": [], "c": [{"coeff": 1.0, "power": 0}], "f": [{"coeff": 1.0, "power": 0}],
            "alpha0": 0.5, "alpha1": 0.0, "gamma0": 0.0, "gamma1": 0.0
        }"#,
    );
    let out = run(&["verify", "--problem", path.to_str().unwrap(), "--N", "32"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha0"));
}

#[test]
fn table1_respects_explicit_ns_without_extension() {
    let out = run(&["table1", "--deltas", "1.4", "--Ns", "64,128"]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines[0], "delta,N,error,order");
    // delta row: order present only at N = 64 (128 has no doubled partner)
    assert!(lines[1].starts_with("1.4,64,"));
    assert!(!lines[1].ends_with(','));
    assert!(lines[2].starts_with("1.4,128,"));
    assert!(lines[2].ends_with(','));
    // uniform block closes the table
    assert!(lines[3].starts_with("uniform,64,"));
    assert_eq!(lines.len(), 5);
}

#[test]
fn table2_small_grid_runs() {
    let out = run(&["table2", "--deltas", "1.5,1.9", "--Ns", "16,32", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["deltas"].as_array().unwrap().len(), 2);
    assert_eq!(doc["entries"][0].as_array().unwrap().len(), 2);
}

#[test]
fn study_runs_builtin_and_file_problems() {
    let out = run(&[
        "study", "tp1", "--deltas", "1.3,1.6", "--Ns", "16,32", "--mode", "exact",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_lines(&out).len(), 1 + 4 + 2);

    let path = write_problem_file(
        "study_constant",
        r#"{
            "delta": 1.5,
            "b": [{"coeff": 2.0, "power": 0}],
            "c": [{"coeff": 3.0, "power": 0}],
            "f": [{"coeff": 1.25, "power": 0}],
            "alpha0": 2.0, "alpha1": 0.0, "gamma0": 0.4, "gamma1": 1.7
        }"#,
    );
    let out = run(&[
        "study",
        "--problem",
        path.to_str().unwrap(),
        "--deltas",
        "1.5",
        "--Ns",
        "16,32",
        "--mode",
        "two-mesh",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_file_problem_with_delta_override_reresolves_powers() {
    let path = write_problem_file(
        "override_delta",
        r#"{
            "delta": 1.5,
            "b": [], "c": [{"coeff": 1.0, "power": 0}],
            "f": [{"coeff": 1.0, "power": 0}],
            "alpha0": 100.0, "alpha1": 0.0, "gamma0": 1.0, "gamma1": 1.0,
            "exact": [{"coeff": 1.0, "power": "delta"}]
        }"#,
    );
    let a = run(&["solve", "--problem", path.to_str().unwrap(), "--N", "16"]);
    let b = run(&[
        "solve", "--problem", path.to_str().unwrap(), "--N", "16", "--delta", "1.8",
    ]);
    assert!(a.status.success() && b.status.success());
    // the exact column is x^delta, so overriding delta changes it
    let exact_at_1 = |out: &Output| stdout_lines(out)[17].clone();
    assert_ne!(stdout_lines(&a)[8], stdout_lines(&b)[8]);
    // both meshes end at x = 1 where x^delta = 1 regardless of delta
    assert_eq!(
        exact_at_1(&a).split(',').nth(2),
        exact_at_1(&b).split(',').nth(2)
    );
}

#[test]
fn jobs_flag_does_not_change_results() {
    let args = ["table1", "--deltas", "1.3,1.7", "--Ns", "16,32,64"];
    let one = bin().args(args).args(["--jobs", "1"]).output().unwrap();
    let two = bin().args(args).args(["--jobs", "2"]).output().unwrap();
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("caputo_bvp_out_{}.csv", std::process::id()));
    let out = run(&[
        "solve", "tp1", "--delta", "1.5", "--N", "16",
        "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x,u_numeric,u_exact,error"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn missing_problem_file_exits_one() {
    let out = run(&["solve", "--problem", "/nonexistent/problem.json", "--N", "16"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_builtin_exits_one() {
    let out = run(&["solve", "tp9", "--delta", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tp1"));
}

fn write_problem_file(tag: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!(
        "caputo_bvp_{tag}_{}.json",
        std::process::id()
    ));
    std::fs::write(&path, body).unwrap();
    path
}
