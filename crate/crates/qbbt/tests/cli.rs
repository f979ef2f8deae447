//! End-to-end exercises of the `qbbt` binary: exit codes, output lines,
//! suite export, and plan execution.

use qbbt::{ExperimentReport, CSV_HEADER};
use qbbt_core::bench::build_original;
use std::path::Path;
use std::process::{Command, Output};

fn qbbt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbbt"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_program(dir: &Path, name: &str) -> String {
    let p = build_original(name).unwrap();
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, p.to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn equivalent_programs_pass_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_program(dir.path(), "Cir1A");
    let b = write_program(dir.path(), "Cir1B");
    let out = qbbt(&[
        "check", "eq", "--p1", &a, "--p2", &b, "--k", "2", "--epsilon", "0.1", "--s", "30",
        "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
    let text = stdout(&out);
    assert!(text.contains("verdict: PASS"), "got: {text}");
    assert!(text.contains("task=eq"), "got: {text}");
}

#[test]
fn reset_fails_unitarity_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let reset = write_program(dir.path(), "Reset");
    let out = qbbt(&[
        "check", "un", "--p1", &reset, "--k", "2", "--epsilon", "0.1", "--s", "20", "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("verdict: FAIL"), "got: {text}");
    assert!(text.contains("rule=threshold"), "got: {text}");
}

#[test]
fn identity_check_passes_on_the_teleport_program() {
    let dir = tempfile::tempdir().unwrap();
    let teleport = write_program(dir.path(), "TeleportABA");
    let out = qbbt(&[
        "check", "id", "--p1", &teleport, "--k", "10", "--seed", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict: PASS"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_program(dir.path(), "Cir1A");
    let b = write_program(dir.path(), "Cir1B");

    // Neither --s nor --auto-s.
    let out = qbbt(&[
        "check", "eq", "--p1", &a, "--p2", &b, "--k", "2", "--epsilon", "0.1", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // --t without --optimized.
    let out = qbbt(&[
        "check", "eq", "--p1", &a, "--p2", &b, "--k", "2", "--epsilon", "0.1", "--s", "30",
        "--t", "10", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown subcommand (handled by the argument parser).
    let out = qbbt(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    // Unreadable program file.
    let out = qbbt(&[
        "check", "id", "--p1", "/nonexistent/p.json", "--k", "2", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_export_writes_the_full_suite() {
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("suite");
    let out = qbbt(&["bench", "export", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
    assert!(stdout(&out).contains("exported 63 benchmark entries"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dest.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest.as_array().unwrap().len(), 63);
    assert!(dest.join("programs").join("entry_1_a.json").exists());
    assert!(dest.join("programs").join("entry_26.json").exists());
}

#[test]
fn experiment_runs_a_plan_and_writes_both_report_formats() {
    let dir = tempfile::tempdir().unwrap();
    let plan_path = dir.path().join("plan.json");
    std::fs::write(
        &plan_path,
        r#"{ "variant": "original", "ids": ["1"], "k": [1], "repetitions": 50, "seed": 11 }"#,
    )
    .unwrap();

    let csv_path = dir.path().join("report.csv");
    let out = qbbt(&[
        "experiment",
        "--plan",
        plan_path.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
        "--quick",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let row = lines.next().unwrap();
    // --quick caps the derived round count at 500 and runs 20 repetitions.
    assert!(row.starts_with("1,EQ,original,1,0.1,500,0,20,20,"), "got: {row}");

    let json_path = dir.path().join("report.json");
    let out = qbbt(&[
        "experiment",
        "--plan",
        plan_path.to_str().unwrap(),
        "--out",
        json_path.to_str().unwrap(),
        "--quick",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
    let report =
        ExperimentReport::from_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report.seed, 11);
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.rows[0].pass_count, 20);

    // A malformed plan is a usage error.
    std::fs::write(&plan_path, r#"{ "variant": "original" }"#).unwrap();
    let out = qbbt(&[
        "experiment",
        "--plan",
        plan_path.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
