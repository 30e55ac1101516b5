//! End-to-end command-line checks: output formats, file artifacts, and the
//! exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vortexspec(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vortexspec"))
        .args(args)
        .current_dir(dir)
        .env("VORTEXSPEC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn vortex_json_reports_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&vortexspec(&["vortex", "--m", "1"], dir.path()));
    assert_eq!(v["m"], 1);
    let mass = v["mass"].as_f64().unwrap();
    assert!((mass - 48.2983).abs() < 1e-3);
    assert!(v["energy"].as_f64().unwrap().abs() < 1e-5 * mass);
}

#[test]
fn vortex_csv_has_documented_columns_at_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortexspec(
        &["vortex", "--m", "1", "--format", "csv", "--out", "v.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("v.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r,r_tilde,dr_tilde");
    let first_cell = lines.next().unwrap().split(',').nth(1).unwrap();
    // 17 significant digits: "d.dddddddddddddddde[sign]d+"
    assert!(first_cell.contains('e'));
    assert_eq!(first_cell.split('e').next().unwrap().trim_start_matches('-').len(), 18);
}

#[test]
fn index_json_reports_both_operators() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&vortexspec(&["index", "--m", "1"], dir.path()));
    assert_eq!(v["l1"]["zero_count"], 2);
    assert_eq!(v["l2"]["zero_count"], 1);
}

#[test]
fn innerprods_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortexspec(
        &[
            "innerprods",
            "--m",
            "1",
            "--family",
            "k",
            "--delta",
            "0",
            "--rmax",
            "50",
            "--format",
            "csv",
            "--out",
            "k.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("k.csv")).unwrap();
    assert!(text.starts_with("r,v1,v2,v3_first,v3_second\n"));
}

#[test]
fn selfsim_json_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&vortexspec(
        &["selfsim", "--m", "1", "--b", "0.1", "--eta", "0.1"],
        dir.path(),
    ));
    assert!(v["residual_norms"]["sup"].as_f64().unwrap() > 0.0);
    assert!(v["r_end"].as_f64().unwrap() > 17.0);
}

#[test]
fn verify_exit_code_contract() {
    let dir = tempfile::tempdir().unwrap();
    let ok = vortexspec(&["verify", "--m", "1", "--out", "out"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    assert!(dir.path().join("out/report.json").exists());
    // empty m list: nothing to check, still success
    let empty = vortexspec(&["verify", "--m", "", "--out", "out2"], dir.path());
    assert_eq!(empty.status.code(), Some(2), "empty m token is a usage error");
}

#[test]
fn operational_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortexspec(&["vortex", "--m", "1", "--rmax", "10"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn plot_emits_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortexspec(
        &["plot", "--kind", "vortex", "--m", "1", "--out", "p.svg"],
        dir.path(),
    );
    assert!(out.status.success());
    let svg = std::fs::read_to_string(dir.path().join("p.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("<!-- data"));
}
