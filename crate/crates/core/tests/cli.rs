use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cavity-dit"));
    c.env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spectrum_run_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, jobs) in [(&a, "1"), (&b, "3")] {
        let o = run(&["spectrum", "--out", path(out), "--grid", "-60:60:801", "--jobs", jobs]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["iof.csv", "ipm.csv"] {
        let x = fs::read(a.join(f)).unwrap();
        assert_eq!(x, fs::read(b.join(f)).unwrap());
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with("omega_offset_gamma,value\n"));
        assert_eq!(text.lines().count(), 802);
    }
    let cmp: serde_json::Value = serde_json::from_slice(&fs::read(a.join("comparison.json")).unwrap()).unwrap();
    assert!(cmp["comparison"]["dit_peak_ratio"].is_number());
    assert_eq!(cmp["port"], "through");
    assert_eq!(cmp["normalization"], "unit_max");
}

#[test]
fn sidecar_reproduces_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = run(&["spectrum", "--out", path(&first), "--grid", "-40:40:401", "--norm", "unit_area"]);
    assert!(o.status.success());
    let sidecar: serde_json::Value = serde_json::from_slice(&fs::read(first.join("ipm.json")).unwrap()).unwrap();
    assert_eq!(sidecar["method"], "ipm");
    assert_eq!(sidecar["normalization"], "unit_area");
    assert_eq!(sidecar["config"]["params"]["kappa1"], 15.0);
    assert!(sidecar["version"].is_string());

    let again = dir.path().join("again");
    let o = run(&["spectrum", "--config", path(&first.join("ipm.json")), "--out", path(&again)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(first.join("ipm.csv")).unwrap(), fs::read(again.join("ipm.csv")).unwrap());
    assert!(!again.join("iof.csv").exists());
}

#[test]
fn uncoupled_iof_records_missing_dit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"params": {"gamma": 1, "kappa0": 0, "kappa1": 15, "g": 0, "delta": 0, "pump": 0}, "method": "iof", "plot": true}"#,
    );
    let out = dir.path().join("out");
    let o = run(&["spectrum", "--config", &cfg, "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("iof.csv").exists());
    assert!(out.join("plot.gp").exists());
    let text = fs::read_to_string(out.join("comparison.json")).unwrap();
    assert!(text.contains("NoDITStructure"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_field = write_config(dir.path(), "a.json", r#"{"params": {"gamma": 1, "kappa0": 0, "kappa1": 15, "g": -2, "delta": 0, "pump": 1}}"#);
    let o = run(&["spectrum", "--config", &bad_field, "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("params.g"));

    let bad_json = write_config(dir.path(), "b.json", "{\n  \"grid\": {\"min\": 1, \"max\": 0, \"points\": 10}\n}");
    let o = run(&["spectrum", "--config", &bad_json, "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["spectrum", "--config", path(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["sweep", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2), "sweep without a sweep spec");

    let o = run(&["spectrum", "--port", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"params": {"gamma": 1, "kappa0": 0, "kappa1": 2, "g": 1, "delta": 0, "pump": 3}}"#);
    let o = run(&["spectrum", "--config", &cfg, "--out", path(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pump=3"));
}

#[test]
fn sweep_records_failures_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"params": {"gamma": 1, "kappa0": 0, "kappa1": 15, "g": 7.5, "delta": 0, "pump": 1},
            "grid": {"min": -60, "max": 60, "points": 601},
            "sweep": {"parameter": "pump", "values": [2.5, 20.0]}}"#,
    );
    let out = dir.path().join("o");
    let o = run(&["sweep", "--config", &cfg, "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<_> = summary.lines().collect();
    assert_eq!(
        lines[0],
        "sweep_value,dit_iof,dit_ipm,fwhm_iof,fwhm_ipm,splitting_iof,splitting_ipm,dit_peak_ratio,fwhm_discrepancy_pct"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].split(',').skip(1).all(|c| c.parse::<f64>().is_ok()));
    assert!(lines[2].contains("PumpExceedsDecay"));
    assert!(out.join("points/000/ipm.csv").exists());
    assert!(out.join("points/001/iof.csv").exists());

    let all_bad = write_config(
        dir.path(),
        "d.json",
        r#"{"params": {"gamma": 1, "kappa0": 0, "kappa1": 15, "g": 7.5, "delta": 0, "pump": 1},
            "method": "ipm", "sweep": {"parameter": "pump", "values": [16.0]}}"#,
    );
    let o = run(&["sweep", "--config", &all_bad, "--out", path(&dir.path().join("p"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn figure_three_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figure", "fig3", "--out", path(dir.path()), "--grid", "-120:150:541"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let root = dir.path().join("figures/fig3");
    for k in 0..6 {
        let p = root.join(format!("points/{k:03}"));
        assert!(p.join("iof.csv").exists() && p.join("ipm.csv").exists());
    }
    let summary = fs::read_to_string(root.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
}
