use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use waveguard::certificates::Certificate;
use waveguard::runner::RunReport;

const ANTIDAMPING: &str = r#"{
  "domain": {"L": 1, "N": 80, "t_final": 15},
  "g": "identity",
  "F": {"kind": "tanh_antidamping", "params": {"q": 0.4}},
  "init": {"kind": "gaussian_bump", "params": {"amplitude": 1, "center": 0.5, "width": 0.1}}
}"#;

const TRANSPARENT: &str = r#"{
  "domain": {"L": 1, "N": 100, "t_final": 1.4},
  "g": "identity",
  "F": "zero",
  "init": {"kind": "right_moving_pulse", "params": {"amplitude": 1, "center": 0.5, "width": 0.05}},
  "oracle": {"convergence_n": [100, 200, 400]}
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_waveguard"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> i32 {
    let status = bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    status.code().unwrap()
}

fn report(out: &Path) -> RunReport {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn simulate_writes_series_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let text = ANTIDAMPING.replace("\n}", ",\n  \"output\": {\"emit_snapshots\": true}\n}");
    let config = write(dir.path(), "c.json", &text);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["simulate"], &config, &a), 0);
    assert_eq!(run(&["simulate"], &config, &b), 0);
    for name in ["energy.csv", "traces.csv", "snapshots.csv", "report.json"] {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        assert!(!x.is_empty(), "{name} empty");
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    let energy = fs::read_to_string(a.join("energy.csv")).unwrap();
    let mut lines = energy.lines();
    assert_eq!(lines.next().unwrap(), "t,E_total,E_pot,E_kin,E_bnd,Gamma_rho");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 6);
    // 17 significant digits
    let mantissa = first[1].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{}", first[1]);
}

#[test]
fn report_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", ANTIDAMPING);
    let out = dir.path().join("o");
    assert_eq!(run(&["verify"], &config, &out), 0);
    let parsed = report(&out);
    let again: RunReport = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(parsed, again);
    assert!(parsed.bound.unwrap().holds);
    assert!(parsed.gamma_sandwich.unwrap().holds);
    assert_eq!(parsed.exit_status, 0);
}

#[test]
fn certify_then_verify_with_inflated_rate_fails() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", ANTIDAMPING);
    let out = dir.path().join("cert");
    assert_eq!(run(&["certify"], &config, &out), 0);
    let text = fs::read_to_string(out.join("certificate.json")).unwrap();
    let mut cert: Certificate = serde_json::from_str(&text).unwrap();
    assert!(cert.hypotheses().iter().all(|h| h.passed));
    cert.scale_mu(100.0);
    let inflated = write(dir.path(), "inflated.json", &serde_json::to_string(&cert).unwrap());
    let status = bin()
        .args(["verify", "--certificate"])
        .arg(&inflated)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("v"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn infeasible_gain_reports_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", &ANTIDAMPING.replace("0.4", "0.6"));
    let out = dir.path().join("o");
    assert_eq!(run(&["certify"], &config, &out), 2);
    let rep = report(&out);
    let checks = rep.hypotheses.expect("checklist present");
    assert!(checks.iter().any(|h| !h.passed));
    assert_eq!(run(&["verify"], &config, &dir.path().join("v")), 2);
}

#[test]
fn config_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let unknown = write(dir.path(), "u.json", &ANTIDAMPING.replace("\"g\"", "\"gg\""));
    assert_eq!(run(&["simulate"], &unknown, &out), 4);
    let coarse = write(dir.path(), "n.json", &ANTIDAMPING.replace("\"N\": 80", "\"N\": 2"));
    assert_eq!(run(&["simulate"], &coarse, &out), 4);
    assert_eq!(run(&["simulate"], &dir.path().join("missing.json"), &out), 4);
    assert_eq!(bin().arg("frobnicate").status().unwrap().code(), Some(4));
}

#[test]
fn sweep_rows_follow_grid_order_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", &ANTIDAMPING.replace("\"t_final\": 15", "\"t_final\": 4"));
    let sweep = write(dir.path(), "s.json", r#"{"parameters": {"q": [0.1, 0.3, 0.6], "amplitude": [0.5, 1.0]}}"#);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let status = bin()
            .env("WAVEGUARD_THREADS", threads)
            .args(["sweep", "--sweep"])
            .arg(&sweep)
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push(fs::read_to_string(out.join("summary.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let rows: Vec<Vec<&str>> = outputs[0].lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    // keys sort as amplitude, q; q varies fastest
    let params: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(params, [(0.5, 0.1), (0.5, 0.3), (0.5, 0.6), (1.0, 0.1), (1.0, 0.3), (1.0, 0.6)]);
    assert!(rows[2].last().unwrap().contains("infeasible"), "{:?}", rows[2]);
}

#[test]
fn oracle_writes_comparison_and_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", TRANSPARENT);
    let out = dir.path().join("o");
    assert_eq!(run(&["oracle"], &config, &out), 0);
    let table = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let orders: Vec<f64> = table
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(orders.len(), 2);
    assert!(orders.iter().all(|&p| p >= 1.5), "{table}");
    assert!(fs::read_to_string(out.join("comparison.csv")).unwrap().lines().count() > 10);
}
