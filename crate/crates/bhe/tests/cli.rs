use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bhe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bhe")).args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn verify_passes_on_catalog_models() {
    for model in ["su2xsu2", "su2xRxC", "hopf"] {
        let dir = tempfile::tempdir().unwrap();
        let out = bhe(&["verify", "--model", model, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{model}");
        let r = report(dir.path());
        assert_eq!(r["model"], model);
        assert_eq!(r["pass"], true);
        assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "bhe.rho_B"));
    }
}

#[test]
fn verify_fails_on_perturbed_control() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhe(&["verify", "--model", "perturbed-control", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(dir.path())["pass"], false);
}

#[test]
fn flat_model_reports_vanishing_lee_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhe(&["verify", "--model", "flat-torus", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let notes = report(dir.path())["notes"].to_string();
    assert!(notes.contains("V vanishes"), "{notes}");
}

#[test]
fn unknown_model_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhe(&["verify", "--model", "nonesuch", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonesuch"));
}

#[test]
fn reduce_writes_reduction_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhe(&["reduce", "--model", "su2xsu2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let data: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("reduction.json")).unwrap()).unwrap();
    assert!(data.is_object());
}

#[test]
fn pde_solve_converges_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"factors":[{"kind":"sphere","c":2.0},{"kind":"sphere","c":2.0}],"a":0.5,"perturbation":0.01,"grid":32}"#,
    );
    let out_dir = dir.path().join("out");
    let out = bhe(&["pde", "solve", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["surface.csv", "residual.csv", "trace.json", "history.csv", "report.json"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
    let header = fs::read_to_string(out_dir.join("surface.csv")).unwrap();
    assert!(header.starts_with("z,Theta1,Theta2,kappa1,kappa2\n"));
}

#[test]
fn pde_solve_with_inconsistent_class_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"factors":[{"kind":"sphere","c":2.0},{"kind":"sphere","c":2.0}],"a":0.25,"grid":32}"#,
    );
    let out_dir = dir.path().join("out");
    let out = bhe(&["pde", "solve", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let trace: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace["flag"], "stalled");
}

#[test]
fn unequal_areas_with_nonzero_class_are_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"factors":[{"kind":"sphere","c":1.0},{"kind":"sphere","c":2.0}],"a":0.5}"#);
    let out = bhe(&["pde", "residual", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_fields_are_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        write_config(dir.path(), r#"{"factors":[{"kind":"sphere","c":2.0},{"kind":"sphere","c":2.0}],"colour":1}"#);
    let out = bhe(&["pde", "residual", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn converge_reports_exact_round_product() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"factors":[{"kind":"sphere","c":2.0},{"kind":"sphere","c":2.0}],"a":0.5}"#);
    let out_dir = dir.path().join("out");
    let out = bhe(&["converge", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn bad_arguments_exit_with_usage_error() {
    assert_eq!(bhe(&["verify"]).status.code(), Some(2));
    assert_eq!(bhe(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        assert_eq!(bhe(&["verify", "--model", "hopf", "--out", dir.to_str().unwrap()]).status.code(), Some(0));
    }
    assert_eq!(fs::read(a.path().join("report.json")).unwrap(), fs::read(b.path().join("report.json")).unwrap());
}
