use std::fs;
use std::path::Path;
use std::process::Command;

fn ptwell(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_ptwell"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs");
    out.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn manifest(dir: &Path, stem: &str) -> serde_json::Value {
    serde_json::from_slice(&read(dir, &format!("{stem}.manifest.json"))).unwrap()
}

#[test]
fn matrix_outputs_are_bit_identical_across_runs_and_job_counts() {
    let runs: [(&str, &[&str]); 3] = [
        ("matrix.csv", &["matrix", "--n", "41", "--asymmetry", "1e-4"]),
        ("encircle.csv", &["encircle", "--target", "ep4"]),
        ("scan.csv", &["scan", "--target", "gamma-c1-eps", "--nx", "9", "--ny", "7"]),
    ];
    for (file, args) in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(ptwell(a.path(), &[args, &["--jobs", "1"]].concat()), 0);
        assert_eq!(ptwell(b.path(), &[args, &["--jobs", "3"]].concat()), 0);
        assert_eq!(read(a.path(), file), read(b.path(), file), "{file}");
    }
}

#[test]
fn single_point_spectrum_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["spectrum", "--n", "1", "--no-critical", "--psi-at", "0"];
    assert_eq!(ptwell(a.path(), &[&args[..], &["--jobs", "1"]].concat()), 0);
    assert_eq!(ptwell(b.path(), &[&args[..], &["--jobs", "2"]].concat()), 0);
    let csv = read(a.path(), "spectrum.csv");
    assert_eq!(csv, read(b.path(), "spectrum.csv"));
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("gamma,branch,mu1,muj,mui,muk,residual_norm\n"));
    let m = manifest(a.path(), "spectrum");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 5);
    assert_eq!(m["exit_code"], 0);
}

#[test]
fn encircle_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let code = ptwell(dir.path(), &["encircle", "--target", "gamma-c2", "--radius", "0.001", "--g", "0.2"]);
    assert_eq!(code, 0);
    let summary: serde_json::Value = serde_json::from_slice(&read(dir.path(), "encircle.json")).unwrap();
    assert_eq!(summary["cycle_type"], serde_json::json!([2, 1, 1]));
    assert!(summary["closure_error"].as_f64().unwrap() < 1e-6);
    let m = manifest(dir.path(), "encircle");
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs.len(), 2);
    assert!(outputs[0].ends_with("encircle.csv") && outputs[1].ends_with("encircle.json"));
    assert_eq!(m["config"]["potential"]["v0"], 4.0);
    assert_eq!(m["tolerances"]["closure"], 1e-6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(ptwell(d, &["verify", "--fast"]), 0);
    assert_eq!(ptwell(d, &["encircle", "--target", "linear-gamma"]), 4);
    let summary: serde_json::Value = serde_json::from_slice(&read(d, "encircle.json")).unwrap();
    assert!(summary["error"].as_str().unwrap().contains("tracking failed"));
    assert_eq!(ptwell(d, &["encircle", "--target", "ep4", "--set", "closure_tol=0"]), 1);
    // at g = 0 and γ = 0 only the two real states are normalizable
    assert_eq!(ptwell(d, &["spectrum", "--g", "0", "--n", "1", "--no-critical"]), 3);
    assert_eq!(ptwell(d, &["matrix", "--set", "nodez=3"]), 1);
    assert_eq!(ptwell(d, &["matrix", "--n", "0"]), 1);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# model\nv = 0.05\ng0 = -6\n").unwrap();
    let code = ptwell(dir.path(), &["matrix", "--n", "3", "--config", cfg.to_str().unwrap(), "--set", "v=0.0426"]);
    assert_eq!(code, 0);
    let m = manifest(dir.path(), "matrix");
    assert_eq!(m["config"]["map"]["v"], 0.0426);
    assert_eq!(m["config"]["map"]["g0"], -6.0);
}
