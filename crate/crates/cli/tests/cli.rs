use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rmt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmt-lab"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env("RMT_LAB_THREADS", "2")
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn endpoints_json_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rmt(tmp.path(), &["endpoints", "--alpha", "1", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["p"].as_f64().unwrap() - 4.23164).abs() < 1e-5);
    assert!((v["q"].as_f64().unwrap() - 0.09970).abs() < 1e-5);
    assert!(v["residuals"].as_object().unwrap().len() >= 4);

    let m = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(m["command"], "endpoints");
    assert_eq!(m["params"]["alpha"], 1.0);
    let entry = &m["outputs"][0];
    assert_eq!(entry["file"], "endpoints.json");
    assert_eq!(entry["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_variational_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rmt(tmp.path(), &["verify", "--variational", "--alpha", "1", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&tmp.path().join("verify.json"));
    assert!(v["variational"]["ell"].is_number());
    assert!(v["masses"].is_null());
}

#[test]
fn unknown_flag_is_usage_error_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = rmt(&dir, &["endpoints", "--alpha", "1", "--beta", "2", "--gamma", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.exists());
}

#[test]
fn rejected_parameters_name_the_invariant() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = rmt(&dir, &["endpoints", "--alpha", "2", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha_ge_beta"));
    assert!(!dir.exists());
}

#[test]
fn computation_failure_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = rmt(
        &dir,
        &["kernel", "--mode", "finite-n", "--alpha", "1", "--beta", "2", "--n", "14", "--x", "1", "--y", "1"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ill_conditioned"));
    assert!(!dir.exists());
}

#[test]
fn density_csv_header_and_digits() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rmt(tmp.path(), &["density", "--alpha", "1", "--beta", "2", "--measure", "mu2", "--npoints", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("density_mu2.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,dmu2_dx"));
    let first = lines.next().unwrap();
    let x = first.split(',').next().unwrap();
    let mantissa = x.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
    assert_eq!(text.lines().count(), 21);
    let fits = read_json(&tmp.path().join("density_mu2.json"));
    assert!((fits["exponent_fits"]["near_zero"].as_f64().unwrap() + 2.0 / 3.0).abs() < 0.01);
}

#[test]
fn config_supplies_values_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "alpha = 1.0\nbeta = 3.0\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let a = tmp.path().join("a");
    let out = rmt(&a, &["--config", cfg, "endpoints"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&a.join("manifest.json"))["params"]["beta"], 3.0);

    let b = tmp.path().join("b");
    let out = rmt(&b, &["--config", cfg, "endpoints", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&b.join("manifest.json"))["params"]["beta"], 2.0);

    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "alpha = 1.0\nbeta = 2.0\ncolour = 1\n").unwrap();
    let out = rmt(&tmp.path().join("c"), &["--config", bad.to_str().unwrap(), "endpoints"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_identical_on_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--alpha", "1", "--beta", "2", "--n", "6", "--trials", "4", "--seed", "7"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(rmt(&a, &args).status.code(), Some(0));
    assert_eq!(rmt(&b, &args).status.code(), Some(0));
    for f in ["simulate.json", "simulate_values.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let m = read_json(&a.join("manifest.json"));
    assert_eq!(m["seed"], 7);
    let csv = std::fs::read_to_string(a.join("simulate_values.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 6);
}

#[test]
fn special_and_kernel_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rmt(tmp.path(), &["special", "--fn", "meijer", "--m", "2", "--b", "1,1,0", "--zeta", "1.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.22838532970432683).abs() < 1e-12);
    assert!(v["error"].is_number());

    let out = rmt(tmp.path(), &["kernel", "--mode", "hard-edge", "--nu1", "0", "--nu2", "0", "--x", "1", "--y", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn contours_and_comparisons_emit_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rmt(tmp.path(), &["contours", "--alpha", "1", "--beta", "2", "--which", "g2minus", "--npoints", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("contour_g2minus.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("x,t_re,t_im,z_residual"));
    assert_eq!(text.lines().count(), 51);

    let out = rmt(tmp.path(), &["compare", "--alpha", "1", "--beta", "2", "--what", "global", "--ns", "2,4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("compare_global.csv")).unwrap();
    assert!(text.starts_with("n,x,n_kn_scaled,dmu2_dx,deviation\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 3);

    let out = rmt(tmp.path(), &["compare", "--alpha", "1", "--beta", "2", "--what", "global", "--ns", "3"]);
    assert_eq!(out.status.code(), Some(2));
}
