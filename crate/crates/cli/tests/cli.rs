use std::path::PathBuf;
use std::process::{Command, Output};

fn permqubo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permqubo"))
        .args(args)
        .output()
        .unwrap()
}

fn data(file: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
        .to_string_lossy()
        .into_owned()
}

fn tiny_qap() -> String {
    let path = std::env::temp_dir().join(format!("permqubo-cli-{}.dat", std::process::id()));
    std::fs::write(&path, "2\n0 3\n3 0\n0 5\n5 0\n").unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn weights_row_for_gr17() {
    let out = permqubo(&["weights", "--problem", "tsp", "--input", &data("gr17.tsp")]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text
        .lines()
        .find(|l| l.contains("gr17"))
        .unwrap()
        .split_whitespace()
        .collect();
    assert_eq!(row[3..], ["1005188", "745", "7981", "3991", "3074"]);
}

#[test]
fn validate_reports_strict_and_tie_validity() {
    let f = tiny_qap();
    let strict: serde_json::Value = serde_json::from_slice(
        &permqubo(&[
            "validate",
            "--problem",
            "qap",
            "--input",
            &f,
            "--alpha",
            "16",
        ])
        .stdout,
    )
    .unwrap();
    assert_eq!(strict["strictly_valid"], true);
    assert_eq!(strict["feasible_min"], 30);
    let tie: serde_json::Value = serde_json::from_slice(
        &permqubo(&[
            "validate",
            "--problem",
            "qap",
            "--input",
            &f,
            "--alpha",
            "15",
        ])
        .stdout,
    )
    .unwrap();
    assert_eq!(
        (&tie["strictly_valid"], &tie["tie_valid"]),
        (&false.into(), &true.into())
    );
}

#[test]
fn solve_is_reproducible() {
    let args = [
        "solve",
        "--problem",
        "tsp",
        "--input",
        &data("gr17.tsp"),
        "--runs",
        "2",
        "--seed",
        "7",
        "--iterations",
        "5000",
        "--format",
        "csv",
    ];
    let a = permqubo(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = permqubo(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn exit_codes() {
    let missing = permqubo(&["weights", "--problem", "tsp", "--input", "/nonexistent.tsp"]);
    assert_eq!(missing.status.code(), Some(1));
    let stderr = String::from_utf8(missing.stderr).unwrap();
    assert!(stderr.starts_with("error:") && stderr.trim_end().lines().count() == 1);
    assert_eq!(permqubo(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        permqubo(&["solve", "--problem", "tsp"]).status.code(),
        Some(2)
    );
}
