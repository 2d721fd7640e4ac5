use std::fs;
use std::path::Path;
use std::process::Command;

fn skinwalk(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_skinwalk"))
        .args(args)
        .env("SKINWALK_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn payload_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = skinwalk(&[
            "simulate",
            "single",
            "--steps-per-period",
            "400",
            "--svg",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (fa, fb) = (payload_files(a.path()), payload_files(b.path()));
    assert!(fa.iter().any(|(n, _)| n.ends_with(".svg")));
    assert_eq!(fa, fb);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), fa.len());
    assert!(manifest["figure"].as_str().unwrap().contains("intensity"));
}

#[test]
fn json_export_carries_spec_and_run_id() {
    let dir = tempfile::tempdir().unwrap();
    let out = skinwalk(&[
        "analyze",
        "table1",
        "--format",
        "json",
        "--steps-per-period",
        "400",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("table1.json")).unwrap()).unwrap();
    assert_eq!(doc["spec"]["n_straight"], 10);
    assert_eq!(doc["spec"]["boundary"], "ring");
    assert_eq!(doc["run_id"].as_str().unwrap().len(), 16);
    let kappa = doc["payload"]["results"][0]["hoppings"]["kappa"].as_array().unwrap();
    assert_eq!(kappa.len(), 10);
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "injection = [99]\n").unwrap();
    let out = skinwalk(&["simulate", "single", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&cfg, "experiment = \"gbz\"\n").unwrap();
    let out = skinwalk(&["simulate", "pair", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_skinwalk"))
        .args(["simulate", "single", "--out", dir.path().to_str().unwrap()])
        .env("SKINWALK_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_3_and_name_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("stiff.toml");
    fs::write(&cfg, "periods = [1]\n[lattice]\ncoupling_a = 400.0\n").unwrap();
    let out = skinwalk(&[
        "simulate",
        "single",
        "--config",
        cfg.to_str().unwrap(),
        "--steps-per-period",
        "10",
        "--out",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("transmission matrix"));
    assert!(!dir.path().join("run").join("manifest.json").exists());
}

#[test]
fn failed_writes_leave_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // a directory squatting on the second output makes that write fail
    fs::create_dir(dir.path().join("single_walk_phi1.csv")).unwrap();
    let out = skinwalk(&[
        "simulate",
        "single",
        "--steps-per-period",
        "400",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("single_walk_phi0.csv").exists());
    assert!(!dir.path().join("manifest.json").exists());
}
