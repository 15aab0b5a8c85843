//! End-to-end runs of the `mhs` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo_data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn mhs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhs"))
        .args(args)
        .env("MHS_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_CONFIG: &str = "n_x=8\nn_y=8\nn_z=8\n";

#[test]
fn zero_data_converge_in_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", SMALL_CONFIG);
    let out = dir.path().join("out");
    let o = mhs(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let j = read_json(&out.join("diagnostics.json"));
    assert_eq!(j["converged"], true);
    assert_eq!(j["iterations"], 1);
    assert_eq!(j["diagnostics"]["residual_curl"], 0.0);
    for f in ["config.txt", "boundary.mhsf", "b.mhsf", "j.mhsf", "j0.mhsf", "p.mhsf", "summary.txt"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
}

#[test]
fn sample_run_verify_and_linear_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sample");
    let outs = out.to_str().unwrap();
    let cfg = repo_data("sample.cfg");
    let data = repo_data("sample_data.txt");
    let (cfg, data) = (cfg.to_str().unwrap(), data.to_str().unwrap());

    let o = mhs(&["--threads", "2", "--seed", "7", "solve", "--config", cfg, "--data", data, "--out", outs, "--slices"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let j = read_json(&out.join("diagnostics.json"));
    let d = &j["diagnostics"];
    for key in ["residual_curl", "residual_div", "residual_bn", "residual_btau", "residual_force"] {
        assert!(d[key].as_f64().unwrap() < 1e-6, "{key} = {}", d[key]);
    }
    assert_eq!(j["seed"], 7);
    assert!(j["upsilon_contraction"].as_f64().unwrap() < 0.1);
    assert!(out.join("b3_z0.csv").exists());

    let o = mhs(&["verify", "--out", outs]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("residual_force"));

    let o = mhs(&["linear", "--config", cfg, "--data", data, "--out", outs]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lin = read_json(&out.join("linear.json"));
    assert!(lin["residuals"]["btau"].as_f64().unwrap() < 1e-8);
    assert!(lin["residuals"]["bn"].as_f64().unwrap() < 1e-8);
    // Sample amplitude 1e-3: the nonlinear correction is second order.
    let gap = lin["comparison"]["gap_b"].as_f64().unwrap();
    assert!(gap > 0.0 && gap < 1e-6, "gap {gap}");

    // A changed value in a field file is caught by verify.
    let b_path = out.join("b.mhsf");
    let mut bytes = std::fs::read(&b_path).unwrap();
    let k = 64 + 8 * 100 + 6;
    bytes[k] ^= 0x40;
    std::fs::write(&b_path, &bytes).unwrap();
    let o = mhs(&["verify", "--out", outs]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("MISMATCH"));

    // A truncated file is rejected outright.
    bytes.truncate(bytes.len() - 8);
    std::fs::write(&b_path, &bytes).unwrap();
    assert_eq!(code(&mhs(&["verify", "--out", outs])), 3);
}

#[test]
fn runs_are_deterministic_up_to_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", SMALL_CONFIG);
    let data = write(dir.path(), "d.txt", "f_minus=1e-3*cos(x)\nf_plus=1e-3*cos(x)\ng1=1e-3*sin(y)\ng2=0\n");
    let mut reports = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "3")] {
        let out = dir.path().join(name);
        let o = mhs(&["--threads", threads, "solve", "--config", &cfg, "--data", &data, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let mut j = read_json(&out.join("diagnostics.json"));
        j.as_object_mut().unwrap().remove("timestamp");
        reports.push(j);
        assert_eq!(std::fs::read(out.join("b.mhsf")).unwrap(), std::fs::read(dir.path().join("a/b.mhsf")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn incompatible_means_are_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", SMALL_CONFIG);
    let data = write(dir.path(), "d.txt", "f_minus=1e-3\nf_plus=0\ng1=0\ng2=0\n");
    let o = mhs(&["solve", "--config", &cfg, "--data", &data, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("compatibility"));
}

#[test]
fn bad_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", "n_x=8\nn_y=8\nn_z=8\nbogus=1\n");
    let o = mhs(&["solve", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let cfg = write(dir.path(), "c2.cfg", "n_x=7\n");
    assert_eq!(code(&mhs(&["linear", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()])), 1);
}

#[test]
fn large_data_are_rejected_or_fail_to_converge() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "d.txt", "f_minus=0.5*cos(x)\nf_plus=0.5*cos(x)\ng1=0.5*sin(y)\ng2=0.5*sin(x)\n");
    let strict = write(dir.path(), "s.cfg", "n_x=16\nn_y=16\nn_z=32\n");
    let o = mhs(&["solve", "--config", &strict, "--data", &data, "--out", dir.path().join("s").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("smallness"));

    let loose = write(dir.path(), "l.cfg", "n_x=16\nn_y=16\nn_z=32\nM_max=100\n");
    let out = dir.path().join("l");
    let o = mhs(&["solve", "--config", &loose, "--data", &data, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let j = read_json(&out.join("diagnostics.json"));
    assert_eq!(j["converged"], false);
    assert!(j["error"].as_str().unwrap().contains("fixed point not reached"));
}

#[test]
fn verify_without_a_solution_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mhs(&["verify", "--out", dir.path().to_str().unwrap()])), 3);
}

#[test]
fn linear_zero_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", SMALL_CONFIG);
    let out = dir.path().join("o");
    assert_eq!(code(&mhs(&["linear", "--config", &cfg, "--out", out.to_str().unwrap()])), 0);
    let lin = read_json(&out.join("linear.json"));
    assert_eq!(lin["residuals"]["curl"], 0.0);
    assert!(lin["comparison"].is_null());
}
