//! End-to-end checks of the `sai-forge` binary: flags, formats, exit
//! codes and the pattern dump.

use std::path::Path;
use std::process::{Command, Output};

use sai_core::sparse::write_matrix_market;
use sai_core::synth;

fn sai_forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sai-forge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_matrix(dir: &Path, name: &str) -> String {
    let a = synth::diag_dominant_sparse(25, 3, 7);
    let path = dir.join(name);
    write_matrix_market(&a, &path).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_table_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "m.mtx");
    let out = sai_forge(&[
        "run", "--matrix", &path, "--alg", "rsai", "--eps", "0.3", "--c", "3", "--lmax", "10",
        "--la", "3", "--drop", "on", "--rtol", "1e-8", "--maxit", "1000", "--threads", "1",
        "--format", "table",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("matrix"));
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("rsai"));
}

#[test]
fn run_sweep_csv_covers_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "m.mtx");
    let out = sai_forge(&[
        "run", "--matrix", &path, "--alg", "rsai,spai", "--eps", "0.4,0.2", "--format", "csv",
        "--threads", "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // header + 2 algs x 2 eps
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().next().unwrap().starts_with("matrix,algorithm,spar,ptime,n_c,iter,stime"));
}

#[test]
fn run_json_is_parseable() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "m.mtx");
    let out = sai_forge(&["run", "--matrix", &path, "--format", "json", "--threads", "1"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(parsed.is_array());
    assert_eq!(parsed[0]["algorithm"], "rsai");
}

#[test]
fn missing_matrix_is_a_row_failure_not_a_crash() {
    let out = sai_forge(&["run", "--matrix", "/no/such/thing.mtx", "--format", "csv"]);
    assert!(out.status.success(), "sweep completion must exit 0");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("io error") || text.contains("No such file"), "row error missing: {text}");
}

#[test]
fn bad_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "m.mtx");
    let out = sai_forge(&["run", "--matrix", &path, "--eps", "-0.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = sai_forge(&["run", "--matrix", &path, "--drop", "maybe"]);
    assert_eq!(out.status.code(), Some(2));

    let out = sai_forge(&["nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pattern_writes_coordinate_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_matrix(dir.path(), "m.mtx");
    let out_path = dir.path().join("pattern.mtx");
    let out = sai_forge(&[
        "pattern", "--matrix", &path, "--eps", "0.3", "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "%%MatrixMarket matrix coordinate pattern general");
    let size: Vec<usize> =
        lines.next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(size[0], 25);
    assert_eq!(size[1], 25);
    assert_eq!(text.lines().count(), 2 + size[2]);
}

#[test]
fn pattern_bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("pattern.mtx");
    let out = sai_forge(&[
        "pattern", "--matrix", "/no/such/thing.mtx", "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
