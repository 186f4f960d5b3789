use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const FARIMA: &str = r#"{"type": "fracdiff", "H": 0.8, "driver": {"type": "white", "variance": 1.0}}"#;
const FARIMA_UNIT: &str = r#"{"type": "fracdiff", "H": 0.8, "driver": {"type": "white", "variance": 0.7596151734696078}}"#;
const FGN: &str = r#"{"type": "fgn", "H": 0.8, "V": 1.0}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace { dir: TempDir::new().unwrap() }
    }

    fn spec(&self, name: &str, json: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, json).unwrap();
        p
    }
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrd-lab")).args(args).output().unwrap()
}

fn ok_stdout(args: &[&str]) -> String {
    let out = lab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Rows of a two-column CSV after the header.
fn csv_values(text: &str) -> Vec<(String, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.rsplit_once(',').unwrap();
            (k.to_string(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn white_fgn_spectrum_is_flat() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", r#"{"type": "fgn", "H": 0.5}"#);
    let out = ok_stdout(&["spectrum", "--spec", p.to_str().unwrap(), "--points", "20"]);
    let rows = csv_values(&out);
    assert_eq!(rows.len(), 20);
    for (_, v) in rows {
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }
}

#[test]
fn farima_spectrum_at_nyquist() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", FARIMA);
    let out = ok_stdout(&["spectrum", "--spec", p.to_str().unwrap(), "--x-min", "0.5", "--points", "1"]);
    let v = csv_values(&out)[0].1;
    assert!((v - 2f64.powf(-0.6)).abs() < 1e-14, "{v}");
}

#[test]
fn malformed_spec_exits_two() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", r#"{"type": "fgn", "H": 1.5}"#);
    let out = lab(&["acvf", "--spec", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let q = ws.spec("t.json", r#"{"type": "nope"}"#);
    assert_eq!(lab(&["acvf", "--spec", q.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn white_noise_vtf_is_linear() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", r#"{"type": "white"}"#);
    let out = ok_stdout(&["vtf", "--spec", p.to_str().unwrap(), "--nmax", "5"]);
    let got: Vec<f64> = csv_values(&out).into_iter().map(|r| r.1).collect();
    assert_eq!(got, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
}

#[test]
fn fgn_ctf_is_invariant() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", FGN);
    let out = ok_stdout(&["ctf", "--spec", p.to_str().unwrap(), "--nmax", "2", "--m", "7"]);
    let v = csv_values(&out)[1].1;
    assert!((v - 2f64.powf(1.6)).abs() < 1e-10, "{v}");
}

#[test]
fn unit_farima_lag_one() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", FARIMA_UNIT);
    let out = ok_stdout(&["acvf", "--spec", p.to_str().unwrap(), "--nmax", "3"]);
    let rows = csv_values(&out);
    assert!((rows[0].1 - 1.0).abs() < 1e-12);
    assert!((rows[1].1 - 3.0 / 7.0).abs() < 1e-12);
}

#[test]
fn closeness_report_is_json() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", FARIMA);
    let out = ok_stdout(&["closeness", "--spec", p.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let slope = v["slope"]["slope_hat"].as_f64().unwrap();
    assert!(slope.is_finite() && slope < 0.0);
    assert!(v["offset"]["d_hat"].as_f64().unwrap() > 0.0);
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
}

#[test]
fn fgn_closeness_is_degenerate() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", FGN);
    let out = ok_stdout(&["closeness", "--spec", p.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["offset"]["d_hat"].as_f64(), Some(0.0));
    assert_eq!(v["slope"]["saturated"].as_bool(), Some(true));
}

fn brittle_rows(args: &[&str]) -> Vec<(String, usize, usize, f64)> {
    ok_stdout(args)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn brittle_base_converges_at_high_aggregation() {
    let rows = brittle_rows(&["brittle", "--experiment", "1", "--levels", "100", "--lags", "1"]);
    let base = rows.iter().find(|r| r.0 == "base" && r.1 == 100 && r.2 == 1).unwrap();
    assert!((base.3 - 1.0).abs() < 0.01, "{}", base.3);
}

#[test]
fn brittle_experiment_two_perturbed_is_closer_at_first_level() {
    let rows = brittle_rows(&["brittle", "--experiment", "2", "--levels", "1", "--lags", "1"]);
    let pick = |label: &str| rows.iter().find(|r| r.0 == label).unwrap().3;
    let target = 1.0;
    assert!((pick("perturbed") - target).abs() < (pick("base") - target).abs());
}

#[test]
fn sampling_is_deterministic() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", FGN);
    let spec = p.to_str().unwrap();
    let a = ok_stdout(&["sample", "--spec", spec, "--nmax", "64", "--seed", "42"]);
    let b = ok_stdout(&["sample", "--spec", spec, "--nmax", "64", "--seed", "0x2a"]);
    assert_eq!(a, b);
    let c = ok_stdout(&["sample", "--spec", spec, "--nmax", "64", "--seed", "43"]);
    assert_ne!(a, c);
    assert_eq!(lab(&["sample", "--spec", spec, "--nmax", "1"]).status.code(), Some(2));
}

#[test]
fn csv_has_one_header_and_full_precision() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", FARIMA);
    let out = ok_stdout(&["acvf", "--spec", p.to_str().unwrap(), "--nmax", "10"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,value");
    assert!(lines[1..].iter().all(|l| !l.starts_with('n')));
    let mantissa = lines[2].split(',').nth(1).unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
}

#[test]
fn out_flag_writes_file() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", FARIMA);
    let target = ws.dir.path().join("out.json");
    let out = lab(&["acvf", "--spec", p.to_str().unwrap(), "--nmax", "4", "--format", "json", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
}

#[test]
fn bad_thread_count_exits_two() {
    let ws = Workspace::new();
    let p = ws.spec("s.json", FARIMA);
    let out = Command::new(env!("CARGO_BIN_EXE_lrd-lab"))
        .env("LRD_LAB_THREADS", "abc")
        .args(["acvf", "--spec", p.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
