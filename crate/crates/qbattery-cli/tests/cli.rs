//! End-to-end checks of the compiled binary: exit codes, file layout,
//! determinism, and the headline numbers.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbattery"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Value printed by the aligned `key value` report lines.
fn reported(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.split_whitespace().next() == Some(key))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{text}"));
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn reduce_reports_baseline_rates() {
    let out = bin().arg("reduce").output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!((reported(&text, "gamma_diss") - 0.04).abs() < 1e-12);
    assert!((reported(&text, "lambda_a") - 0.043).abs() < 1e-12);
    assert!((reported(&text, "j_direct") - 0.02).abs() < 1e-12);
    assert!(text.contains("regime"), "missing adiabatic report:\n{text}");
}

#[test]
fn reduce_reports_superconducting_rates() {
    let out = bin()
        .args(["reduce", "--preset", "superconducting"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    // 0.33^2 / (5/2)
    assert!((reported(&text, "gamma_diss") - 0.04356).abs() < 1e-10);
}

#[test]
fn set_overrides_apply_in_order() {
    let out = bin()
        .args(["reduce", "--set", "g_a=0.2", "--set", "g_a=0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(reported(&text, "gamma_diss"), 0.0);
    assert_eq!(reported(&text, "gamma_a_eff"), 0.0);
}

#[test]
fn malformed_config_names_the_offending_key() {
    let dir = tmp("badconf");
    let path = dir.join("bad.conf");
    fs::write(&path, "g_a = 0.6\ngamma_m = twenty\n").unwrap();
    let out = bin()
        .args(["reduce", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("gamma_m"), "{err}");
}

#[test]
fn preset_and_config_together_are_rejected() {
    let dir = tmp("conflict");
    let path = dir.join("ok.conf");
    fs::write(&path, "g_a = 0.6\n").unwrap();
    let out = bin()
        .args([
            "reduce",
            "--preset",
            "baseline",
            "--config",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("one parameter source"));
}

#[test]
fn unknown_set_key_is_rejected() {
    let out = bin()
        .args(["reduce", "--set", "kappa_q=1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("kappa_q"));
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn figure_output_is_deterministic() {
    let d1 = tmp("fig_det_1");
    let d2 = tmp("fig_det_2");
    for d in [&d1, &d2] {
        let out = bin()
            .args(["figures", "fig2a", "--out-dir", d.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let a = fs::read(d1.join("fig2a.csv")).unwrap();
    let b = fs::read(d2.join("fig2a.csv")).unwrap();
    assert_eq!(a, b, "fig2a.csv differs between identical runs");
    assert!(d1.join("fig2a.meta.json").exists());
}

#[test]
fn fig2a_resonant_curve_reaches_the_steady_energy() {
    let dir = tmp("fig2a_end");
    let out = bin()
        .args(["figures", "fig2a", "--out-dir", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("fig2a.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|c| *c == name).unwrap();
    let (i_delta, i_eb) = (col("delta_b_p"), col("e_b"));
    let last_resonant = lines
        .filter_map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            let delta: f64 = cells[i_delta].parse().ok()?;
            let e_b: f64 = cells[i_eb].parse().ok()?;
            (delta == 0.0).then_some(e_b)
        })
        .next_back()
        .expect("fig2a has a resonant curve");
    assert!(
        (last_resonant / 74.88 - 1.0).abs() < 0.015,
        "resonant endpoint {last_resonant}"
    );
}

#[test]
fn ep_solve_recovers_the_baseline_coupling() {
    let dir = tmp("ep_j");
    let out = bin()
        .args(["ep", "--free", "j", "--out-dir", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("ep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1, "expected a single solution:\n{csv}");
    let cells: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(cells[0], "j");
    let j: f64 = cells[1].parse().unwrap();
    assert!((j - 0.02).abs() < 1e-10, "j = {j}");
    let overlap: f64 = cells[3].parse().unwrap();
    assert!(overlap > 0.999, "overlap = {overlap}");
}

#[test]
fn infeasible_ep_points_fail_soft_with_exit_2() {
    let dir = tmp("ep_sweep");
    let out = bin()
        .args([
            "sweep",
            "--axis",
            "delta_b_p:-0.05:0.05:5",
            "--lock",
            "ep",
            "--output",
            "e_b",
            "--out-dir",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(csv.contains("ep_infeasible"), "{csv}");
    assert!(csv.contains("ok"), "{csv}");
}

#[test]
fn simulate_both_writes_a_comparable_pair() {
    let dir = tmp("sim_both");
    let out = bin()
        .args([
            "simulate",
            "--model",
            "both",
            "--samples",
            "201",
            "--out-dir",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let eff = fs::read_to_string(dir.join("trajectory_eff.csv")).unwrap();
    let full = fs::read_to_string(dir.join("trajectory_full.csv")).unwrap();
    assert!(eff.starts_with("t,re_a,im_a,re_b,im_b,n_aa"));
    assert!(full.starts_with("t,re_a,im_a,re_b,im_b,re_c,im_c,n_aa"));

    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.contains("deviation"))
        .expect("comparison summary");
    let dev: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    assert!(dev < 0.05, "models disagree: {dev}");
}

#[test]
fn validate_passes_at_scale_one_and_fails_at_zero() {
    let out = bin().arg("validate").output().unwrap();
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("H1"), "{text}");
    assert!(text.contains("PASS"), "{text}");

    let out0 = bin()
        .args(["validate", "--tol-scale", "0"])
        .output()
        .unwrap();
    assert_eq!(out0.status.code(), Some(1));
    assert!(stdout(&out0).contains("FAIL"));
}
