//! End-to-end behaviour of the `ipl` binary.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ipl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipl")).args(args).env_remove("OUTPUT_DIR").output().unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.display().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn kernel_rows(dir: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(dir.join("kernel_eval.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,theta,b_s,b_bar_s,quad_err,scaled_deviation"));
    lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn kernel_eval_half_at_right_angle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ipl(&["kernel-eval", "--s", "0.5", "--theta", "1.5707963268", "--out", &out_arg(tmp.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = kernel_rows(tmp.path());
    assert_eq!(rows.len(), 1);
    // b at θ = π/2 is 32/(9π); the input sits 2e-11 above π/2
    assert!((rows[0][2] - 32.0 / (9.0 * PI)).abs() < 1e-9);
    let m = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(m["schema"], 1);
    assert_eq!(m["command"], "kernel-eval");
    assert_eq!(m["versions"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn kernel_eval_endpoint_matches_small_angle_extrapolation() {
    let tmp = tempfile::tempdir().unwrap();
    let (d1, d2) = (1e-3, 2e-3);
    let thetas = format!("3.1415926536,{},{}", PI - d1, PI - d2);
    let out = ipl(&["kernel-eval", "--s", "0.5,0.1", "--theta", &thetas, "--out", &out_arg(tmp.path())]);
    assert!(out.status.success());
    let rows = kernel_rows(tmp.path());
    assert_eq!(rows.len(), 6);
    for block in rows.chunks(3) {
        assert_eq!(block[0][1], PI);
        // b is even about θ = π, so b(π − δ) = b(π) + cδ² + O(δ⁴)
        let extrapolated = (4.0 * block[1][2] - block[2][2]) / 3.0;
        assert!((block[0][2] - extrapolated).abs() < 1e-8 * block[0][2], "{block:?}");
    }
    assert_eq!(rows[0][0], 0.5);
    assert_eq!(rows[3][0], 0.1);
}

#[test]
fn kernel_eval_rejects_zero_angle_before_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("never");
    let out = ipl(&["kernel-eval", "--s", "0.5", "--theta", "0", "--out", &out_arg(&dir)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage error"));
    assert!(!dir.exists());
}

#[test]
fn output_dir_env_overrides_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("env");
    let flag_dir = tmp.path().join("flag");
    let out = Command::new(env!("CARGO_BIN_EXE_ipl"))
        .args(["kernel-eval", "--s", "0.3", "--theta", "1", "--out", &out_arg(&flag_dir)])
        .env("OUTPUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.join("kernel_eval.csv").exists());
    assert!(!flag_dir.exists());
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn verify_bounds_forced_failure_and_single_point_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "one.json",
        r#"{"s_grid": [0.3], "n_theta": 1, "n_y": 1, "povzner_samples": 1000, "seed": 7}"#,
    );
    let ok = tmp.path().join("ok");
    let out = ipl(&["verify-bounds", "--config", &cfg, "--out", &out_arg(&ok)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&ok.join("bound_report.json"));
    assert_eq!(report["schema"], 1);
    let checks = report["checks"].as_array().unwrap();
    let mut names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    let n = names.len();
    names.dedup();
    assert_eq!(names.len(), n, "one record per check");
    assert_eq!(n, 18);
    assert_eq!(read_json(&ok.join("manifest.json"))["seed"], 7);

    let bad = write_config(tmp.path(), "bad.json", r#"{"s_grid": [0.3], "n_theta": 8, "n_y": 8, "povzner_samples": 0, "slack": -1}"#);
    let fail = tmp.path().join("fail");
    let out = ipl(&["verify-bounds", "--config", &bad, "--out", &out_arg(&fail)]);
    assert_eq!(out.status.code(), Some(1));
    let report = read_json(&fail.join("bound_report.json"));
    assert_eq!(report["all_passed"], false);
    let evaluated = report["checks"].as_array().unwrap().iter().filter(|c| c["worst_ratio"].as_f64().unwrap() > 0.0);
    assert!(evaluated.clone().count() > 10);
    assert!(evaluated.into_iter().all(|c| c["passed"] == false));
}

#[test]
fn verify_bounds_is_reproducible_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"s_grid": [0.01, 0.5], "n_theta": 16, "n_y": 16, "povzner_samples": 20000, "seed": 3}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(ipl(&["verify-bounds", "--config", &cfg, "--out", &out_arg(&a)]).status.success());
    assert!(ipl(&["verify-bounds", "--config", &cfg, "--out", &out_arg(&b)]).status.success());
    let read = |d: &Path| std::fs::read(d.join("bound_report.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    let (ma, mb) = (read_json(&a.join("manifest.json")), read_json(&b.join("manifest.json")));
    assert_eq!(ma["versions"], mb["versions"]);
    assert_eq!(ma["config"], mb["config"]);
}

#[test]
fn unknown_bound_config_field_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"n_theta": 4, "n_thetas": 5}"#);
    let out = ipl(&["verify-bounds", "--config", &cfg, "--out", &out_arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_thetas"));
}

const SOLVE: &str = r#"{
  "n_r": 48, "v_max": 8, "n_quad": [48, 24, 32, 24], "theta_cut": 0.001,
  "t_end": 0.5, "k_weights": [2, 4],
  "initial": {"kind": "maxwellian", "mass": 1, "temperature": 1},
  "s": 0.05
}"#;

#[test]
fn solve_missing_field_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &SOLVE.replace(r#""theta_cut": 0.001,"#, ""));
    let out = ipl(&["solve", "--config", &cfg, "--out", &out_arg(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta_cut"));

    let cfg = write_config(tmp.path(), "d.json", &SOLVE.replace(r#""mass": 1, "#, ""));
    let out = ipl(&["solve", "--config", &cfg, "--out", &out_arg(&tmp.path().join("o"))]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mass"));
}

#[test]
fn solve_on_equilibrium_stays_at_the_floor() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SOLVE);
    let out = ipl(&["solve", "--config", &cfg, "--out", &out_arg(tmp.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&tmp.path().join("summary.json"));
    assert_eq!(summary["schema"], 1);
    for v in summary["sup_error"].as_array().unwrap() {
        assert!(v.as_f64().unwrap() < 1e-6, "{v}");
    }
    assert_eq!(summary["inverse_power"]["entropy_violations"], 0);
    assert!(summary["hard_sphere"]["mass_drift"].as_f64().unwrap() < 1e-8);
    let flow = std::fs::read_to_string(tmp.path().join("flow_s.csv")).unwrap();
    assert!(flow.starts_with("t,mass,energy,entropy,l1k_2,l1k_4,min_f\n"));
    let err = std::fs::read_to_string(tmp.path().join("error.csv")).unwrap();
    assert!(err.starts_with("t,F_l1k_2,F_l1k_4\n"));
    assert!(tmp.path().join("final_s.csv").exists());
}

#[test]
fn converge_writes_study_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SOLVE
        .replace(r#""s": 0.05"#, r#""s_list": [0.1, 0.05]"#)
        .replace(r#""t_end": 0.5"#, r#""t_end": 0.2"#)
        .replace(r#""n_r": 48"#, r#""n_r": 24"#)
        .replace("[48, 24, 32, 24]", "[24, 12, 16, 16]")
        .replace(r#"{"kind": "maxwellian", "mass": 1, "temperature": 1}"#, r#"{"kind": "bimodal", "mass": 1, "t1": 0.5, "t2": 1.5, "weight": 0.5}"#);
    let cfg = write_config(tmp.path(), "c.json", &text);
    let out = ipl(&["converge", "--config", &cfg, "--out", &out_arg(tmp.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&tmp.path().join("summary.json"));
    assert_eq!(summary["rows"].as_array().unwrap().len(), 2);
    let ratio = summary["ratio_max_min"][0].as_f64().unwrap();
    assert!((1.0..=2.0).contains(&ratio), "{ratio}");
    assert!(summary["floor_margin"][0].as_f64().unwrap() > 10.0);
    let study = std::fs::read_to_string(tmp.path().join("study.csv")).unwrap();
    assert!(study.starts_with("s,sup_F_l1k_2,sup_F_l1k_4,scaled_at_T_l1k_2,scaled_at_T_l1k_4,floor_sup_F_l1k_2,floor_sup_F_l1k_4\n"));
    assert!(tmp.path().join("error_s0.1.csv").exists() && tmp.path().join("error_s0.05.csv").exists());
}

#[test]
fn solve_without_config_is_a_usage_error() {
    let out = ipl(&["solve"]);
    assert_eq!(out.status.code(), Some(2));
}
