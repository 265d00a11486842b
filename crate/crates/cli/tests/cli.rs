//! End-to-end checks of the command-line interface and its exit-code
//! contract (0 = success/Certified, 2 = NotCertified, 1 = error).

use std::path::Path;
use std::process::{Command, Output};

fn daecert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daecert"))
        .args(args)
        .output()
        .expect("spawn daecert")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gamma_bound_prints_three() {
    let out = daecert(&["gamma-bound", "--alpha-bar", "2", "--lf", "1", "--lg", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "3");
}

#[test]
fn certify_exam1_gamma4_exits_not_certified() {
    let dir = tempfile::tempdir().unwrap();
    let out = daecert(&[
        "certify",
        "--example",
        "exam1",
        "--gamma",
        "4",
        "--t-end",
        "2",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("NOT CERTIFIED"));
    assert!(dir.path().join("report.txt").exists());
    assert!(dir.path().join("mu_samples.csv").exists());
}

#[test]
fn certify_box_smex2_is_certified() {
    let dir = tempfile::tempdir().unwrap();
    let out = daecert(&[
        "certify-box",
        "--example",
        "smex2",
        "--grid",
        "31",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("CERTIFIED"));
    assert!(text.contains("gz^-1*gw"));
    assert!(text.contains("grid evidence"));
}

#[test]
fn certify_stable_model_file_is_certified() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("stable.dae");
    std::fs::write(&model, "n=1 m=1\nf1 = -3*w1 + z1\ng1 = z1 - w1\n").unwrap();
    let out = daecert(&[
        "certify",
        "--model",
        model.to_str().unwrap(),
        "--ic",
        "1;1",
        "--t-end",
        "2",
        "--beta-min",
        "0.4",
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    // No --gamma: the ladder must find a certifying value for this system
    // (the reduced dynamics are -2w).
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("CERTIFIED"));
}

#[test]
fn measure_reads_headerless_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.csv");
    std::fs::write(&file, "-2,1\n0,-3\n").unwrap();
    let out = daecert(&["measure", "--input", file.to_str().unwrap(), "--p", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "-2");
    let out = daecert(&["measure", "--input", file.to_str().unwrap(), "--p", "inf"]);
    assert_eq!(stdout(&out).trim(), "-1");
}

#[test]
fn simulate_writes_deterministic_csv() {
    let run = |dir: &Path| {
        let out = daecert(&[
            "simulate",
            "--example",
            "exam1",
            "--t-end",
            "0.5",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(dir.join("trajectory.csv")).unwrap()
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let a = run(d1.path());
    let b = run(d2.path());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("t,w1,z1\n"));
}

#[test]
fn observer_writes_error_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = daecert(&[
        "observer",
        "--example",
        "oex1_observer",
        "--t-end",
        "1",
        "--plot",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for file in ["plant.csv", "observer.csv", "error.csv", "error.svg"] {
        assert!(dir.path().join(file).exists(), "{file} missing");
    }
    let err = std::fs::read_to_string(dir.path().join("error.csv")).unwrap();
    assert!(err.starts_with("t,err_norm,e1,e2\n"));
}

#[test]
fn usage_errors_exit_one() {
    let out = daecert(&["certify", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = daecert(&["certify", "--example", "nope", "--t-end", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
    let out = daecert(&["certify", "--t-end", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "simulate",
        "certify",
        "certify-box",
        "measure",
        "gamma-bound",
        "observer",
        "list-examples",
    ] {
        let out = daecert(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help failed");
        assert!(!stdout(&out).is_empty());
    }
    let help = stdout(&daecert(&["certify", "--help"]));
    for flag in [
        "--gamma",
        "--p",
        "--metric",
        "--beta-min",
        "--ic",
        "--threads",
    ] {
        assert!(help.contains(flag), "certify --help misses {flag}");
    }
}

#[test]
fn list_examples_names_all_five() {
    let out = daecert(&["list-examples"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for id in ["exam1", "exam3", "smex1", "smex2", "oex1_observer"] {
        assert!(text.contains(id));
    }
}
