use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn reference_params() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/reference_params.json")
}

fn setup(extra: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    fs::copy(reference_params(), dir.path().join("params.json")).unwrap();
    let cfg = dir.path().join("run.json");
    let sep = if extra.is_empty() { "" } else { ", " };
    fs::write(&cfg, format!(r#"{{"params_file": "params.json"{sep}{extra}}}"#)).unwrap();
    (dir, cfg)
}

fn torcat(cfg: &Path, out: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_torcat"))
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn params_report_values() {
    let (dir, cfg) = setup("");
    let out = dir.path().join("out");
    let o = torcat(&cfg, &out, &["--protocol", "params-report"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let theta = r["derived"]["theta_zp"].as_f64().unwrap();
    let n_in = r["N_in_threshold_chi1"].as_f64().unwrap();
    assert!((theta / 6.16e-9 - 1.0).abs() < 5e-3, "{theta}");
    assert!((n_in / 6.45e7 - 1.0).abs() < 1e-2, "{n_in}");
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("theta_zp"));
}

#[test]
fn missing_params_file_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"params_file": "absent.json", "protocol": "squeeze"}"#).unwrap();
    let out = dir.path().join("out");
    let o = torcat(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("params_file"));
    assert!(!out.exists());
}

#[test]
fn unknown_key_and_bad_value_are_rejected() {
    let (dir, cfg) = setup(r#""protocol": "squeeze", "chii": 2.0"#);
    let out = dir.path().join("out");
    let o = torcat(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("chii"));
    assert!(!out.exists());

    let (dir, cfg) = setup(r#""protocol": "gps-cat", "eta": 1.5"#);
    let out = dir.path().join("out");
    let o = torcat(&cfg, &out, &["--grid-points", "41"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn impossible_outcome_exits_numerical() {
    let (dir, cfg) = setup(r#""protocol": "gps-cat", "r1": 0.0, "r2": 0.0, "T_tap": 0.5"#);
    let out = dir.path().join("out");
    let o = torcat(&cfg, &out, &["--grid-points", "41"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn reruns_are_byte_identical() {
    let (dir, cfg) = setup(r#""protocol": "gps-cat", "seed": 7"#);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = torcat(&cfg, out, &["--grid-points", "61"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["report.json", "summary.txt", "state_optical.csv", "state_optical.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn csv_round_trips_exactly() {
    let (dir, cfg) = setup(r#""protocol": "mech-prep", "optical_input": "fock1""#);
    let out = dir.path().join("out");
    let o = torcat(&cfg, &out, &["--grid-points", "51"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read(out.join("state_mechanical.csv")).unwrap();
    let w = torcat_core::GridWigner::read_csv(std::io::Cursor::new(&text), "reload").unwrap();
    let mut again = Vec::new();
    w.write_csv(&mut again).unwrap();
    assert_eq!(text, again);
    let r = report(&out);
    assert!(r["closed_form_linf"].as_f64().unwrap() < 1e-6);
    let side: Value = serde_json::from_str(&fs::read_to_string(out.join("state_mechanical.json")).unwrap()).unwrap();
    assert!(side.is_object());
}

#[test]
fn two_pulse_small_grid() {
    let (dir, cfg) = setup(r#""protocol": "two-pulse", "m": 1"#);
    let out = dir.path().join("out");
    let o = torcat(&cfg, &out, &["--grid-points", "81"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!(r["mechanical"]["negativity_volume"].as_f64().unwrap() > 0.01);
    assert!(r["success_weight"].as_f64().unwrap() > 0.0);
    assert!(out.join("state_mechanical.csv").exists());
    assert!(out.join("state_optical.csv").exists());
}
