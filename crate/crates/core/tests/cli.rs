use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_wavekin");

fn config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn small(extra_run: &str) -> String {
    format!(
        r#"{{
        "physical": {{"lambda1": 1, "lambda2": 1, "nu": 0.01}},
        "grid": {{"r_max": 8, "n": 32}},
        "initial": {{"preset": "gaussian_bump", "amplitude": 1, "center": 2, "width": 0.5}},
        "run": {{"t_final": 0.1, "record_every": 2{extra_run}}},
        "verify": {{"seed": 3, "samples": 4, "pairs": 4}}
    }}"#
    )
}

fn wavekin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_ledger_and_snapshots_with_headers() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), &small(""));
    let out = dir.path().join("out");
    let (code, stdout, _) = wavekin(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code, 0, "{stdout}");
    let ledger = fs::read_to_string(out.join("ledger.csv")).unwrap();
    let mut lines = ledger.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# config_sha256=") && header.ends_with(" seed=3"));
    assert_eq!(
        lines.next().unwrap(),
        "t,m0,m1,mN,mN1,mN2,l1N3,c0,c1,envelope_slack,s1,s2,s3,trunc_warn"
    );
    let snap = fs::read_to_string(out.join("spectrum_t0.csv")).unwrap();
    assert!(snap.starts_with("# config_sha256="));
    assert_eq!(snap.lines().nth(1).unwrap(), "r,f,env");
    assert_eq!(snap.lines().count(), 2 + 32);
    assert!(out.join("spectrum_t0.1.csv").exists());
}

#[test]
fn identical_inputs_give_identical_files() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), &small(""));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert_eq!(wavekin(&["run", "--config", s(&cfg), "--out", s(out)]).0, 0);
        wavekin(&["verify", "--config", s(&cfg), "--out", s(out), "--suite", "holder", "--seed", "9"]);
        assert_eq!(wavekin(&["eval", "--config", s(&cfg), "--out", s(out), "--t0"]).0, 0);
    }
    for name in ["ledger.csv", "report.json", "eval.csv", "spectrum_t0.1.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn eval_dump_format() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), &small(""));
    let (code, _, _) = wavekin(&["eval", "--config", s(&cfg), "--out", s(dir.path()), "--t0"]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "r,f,gain,theta,q");
    let row: Vec<f64> = text.lines().nth(10).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 5);
    assert!((row[4] - (row[2] - row[1] * row[3])).abs() <= 1e-12 * row[2].abs().max(1.0));
}

#[test]
fn verify_report_carries_hash_and_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), &small(""));
    let (code, stdout, _) = wavekin(&[
        "verify", "--config", s(&cfg), "--out", s(dir.path()), "--suite", "attenuation", "--seed", "11",
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("PASS attenuation"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let recs = report.as_array().unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["seed"], 11);
    assert_eq!(recs[0]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(recs[0]["provenance"], "derived");
}

#[test]
fn failing_check_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), &small(""));
    let (code, stdout, _) = wavekin(&[
        "verify", "--config", s(&cfg), "--out", s(dir.path()), "--suite", "gamma_limit",
    ]);
    assert!(stdout.contains("gamma_limit"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let passed = report[0]["passed"].as_bool().unwrap();
    assert_eq!(code, if passed { 0 } else { 1 });
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = small("").replace("\"nu\": 0.01", "\"nu\": -1");
    let cfg = config(dir.path(), &bad);
    let (code, _, stderr) = wavekin(&["run", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code, 2);
    assert!(stderr.contains("physical.nu"), "{stderr}");

    let exact = small(", \"mode\": \"exact_resonance\"");
    let cfg = config(dir.path(), &exact);
    let (code, _, stderr) = wavekin(&["run", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code, 2);
    assert!(stderr.contains("empty resonant manifold"), "{stderr}");

    let zero = small("").replace("\"amplitude\": 1", "\"amplitude\": 0");
    let cfg = config(dir.path(), &zero);
    let (code, _, stderr) = wavekin(&["run", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code, 2);
    assert!(stderr.contains("S3"), "{stderr}");

    let (code, _, _) = wavekin(&["run", "--config", "/no/such/config.json"]);
    assert_eq!(code, 2);
}

#[test]
fn spectrum_file_input() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), &small(""));
    let out = dir.path().join("out");
    assert_eq!(wavekin(&["run", "--config", s(&cfg), "--out", s(&out)]).0, 0);
    // Snapshots carry an extra `env` column; strip it to get an `r,f` file.
    let snap = fs::read_to_string(out.join("spectrum_t0.1.csv")).unwrap();
    let rf: String = snap
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n")
        .collect();
    fs::write(dir.path().join("start.csv"), rf).unwrap();
    let body = small("").replace(
        r#"{"preset": "gaussian_bump", "amplitude": 1, "center": 2, "width": 0.5}"#,
        r#"{"preset": "file", "path": "start.csv"}"#,
    );
    let cfg = config(dir.path(), &body);
    let (code, _, stderr) = wavekin(&["eval", "--config", s(&cfg), "--out", s(dir.path()), "--t0"]);
    assert_eq!(code, 0, "{stderr}");
}

#[test]
fn strict_run_passes_on_admissible_data() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), &small(""));
    let (code, _, _) = wavekin(&["run", "--config", s(&cfg), "--out", s(dir.path()), "--strict"]);
    assert_eq!(code, 0);
}
