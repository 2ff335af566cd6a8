use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qmemory(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmemory"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// `(t, value, stderr)` rows of an autocorrelation CSV.
fn read_curve(path: &Path) -> Vec<(f64, f64, Option<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().ok())
        })
        .collect()
}

#[test]
fn check_passes_on_small_ring() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qmemory(&["check", "--model", "ising", "--size", "4", "--beta", "0.9", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&dir.path().join("check.json"));
    assert_eq!(report["schema"], 1);
    assert_eq!(report["result"]["passed"], true);
    for c in report["result"]["checks"].as_array().unwrap() {
        assert!(c["value"].as_f64().unwrap() < 1e-8, "{c}");
    }
    assert_eq!(report["result"]["ergodicity"]["commutant_dimension"], 2);
    let adj = report["result"]["adjudication"].as_array().unwrap();
    let labels: Vec<&str> = adj.iter().map(|a| a["quoted_label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["±2", "(2n−N)", "tanh(β/2)"]);
    assert!(adj.iter().all(|a| a["consistent"] == true));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["config_hash"], report["config_hash"]);
    assert_eq!(manifest["artifacts"][0], "check.json");
}

#[test]
fn empty_time_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"schema": 1, "model": {"kind": "kitaev_torus", "size": 2}, "beta": 1.0, "times": {"points": []}}"#,
    )
    .unwrap();
    let o = qmemory(&["autocorr", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`times`"), "{err}");
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn bad_fields_and_flags_are_usage_errors() {
    let o = qmemory(&["autocorr", "--model", "ising", "--size", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));
    let o = qmemory(&["autocorr", "--model", "cubic", "--size", "4", "--beta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qmemory(&["autocorr", "--model", "ising", "--size", "4", "--beta", "1", "--logical", "W"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`logical`"));
    let o = qmemory(&["autocorr", "--model", "kitaev", "--size", "2", "--beta", "1", "--method", "kmc", "--n-traj", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`n_traj`"));
}

#[test]
fn capacity_violation_suggests_a_feasible_method() {
    let o = qmemory(&["autocorr", "--model", "kitaev", "--size", "3", "--beta", "1", "--method", "exact-full"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("exact-reduced"), "{err}");
    let o = qmemory(&["autocorr", "--model", "kitaev", "--size", "6", "--beta", "1", "--method", "exact-reduced"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kmc"));
}

#[test]
fn exact_and_sampled_autocorrelations_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"model": {"kind": "kitaev_torus", "size": 2}, "beta": 0.8,
            "bath": {"gamma": 1.0, "gamma_zero": 0.5},
            "times": {"points": [0.0, 0.1, 0.3, 0.6, 1.0, 2.0]},
            "n_traj": 10000, "seed": 5}"#,
    )
    .unwrap();
    let exact_dir = dir.path().join("exact");
    let kmc_dir = dir.path().join("kmc");
    for (method, out) in [("exact-reduced", &exact_dir), ("kmc", &kmc_dir)] {
        let o = qmemory(&[
            "autocorr",
            "--config",
            cfg.to_str().unwrap(),
            "--method",
            method,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        for f in ["autocorrelation.csv", "autocorrelation.json", "manifest.json"] {
            assert!(out.join(f).exists(), "{method}: {f}");
        }
    }
    let exact = read_curve(&exact_dir.join("autocorrelation.csv"));
    let kmc = read_curve(&kmc_dir.join("autocorrelation.csv"));
    assert_eq!(exact.len(), 6);
    for (e, k) in exact.iter().zip(&kmc) {
        assert_eq!(e.0, k.0);
        assert!(e.2.is_none());
        let se = k.2.unwrap();
        assert!((e.1 - k.1).abs() <= 3.0 * se + 1e-12, "t={}: {} vs {} ± {se}", e.0, e.1, k.1);
    }
    let manifest = read_json(&kmc_dir.join("manifest.json"));
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config"]["logical"], "Z1");
    assert_eq!(manifest["bath"]["omega_star"], 4.0);
}

#[test]
fn exact_full_matches_exact_reduced() {
    let dir = tempfile::tempdir().unwrap();
    let mut curves = Vec::new();
    for method in ["exact-full", "exact-reduced"] {
        let out = dir.path().join(method);
        let o = qmemory(&[
            "autocorr", "--model", "ising", "--size", "5", "--beta", "0.7", "--dressing", "1,3", "--times",
            "0.1,1,10", "--method", method, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        curves.push(read_curve(&out.join("autocorrelation.csv")));
    }
    for (a, b) in curves[0].iter().zip(&curves[1]) {
        assert!((a.1 - b.1).abs() < 1e-9, "{a:?} vs {b:?}");
    }
}

#[test]
fn reruns_reproduce_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let files = ["autocorrelation.csv", "autocorrelation.json", "manifest.json"];
    for method in ["exact-reduced", "kmc"] {
        let run = |extra: &[&str]| {
            let mut args = vec![
                "autocorr", "--model", "kitaev", "--size", "2", "--beta", "1.0", "--times", "0.2,1", "--method",
                method, "--n-traj", "2000", "--seed", "8", "--out", out,
            ];
            args.extend_from_slice(extra);
            let o = qmemory(&args);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            files.map(|f| fs::read(dir.path().join(f)).unwrap())
        };
        let first = run(&[]);
        assert_eq!(first, run(&[]), "{method}");
        // the thread count is recorded in the config but does not change the numbers
        let serial = run(&["--threads", "1"]);
        let strip = |b: &[u8]| -> Vec<String> {
            String::from_utf8_lossy(b).lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
        };
        assert_eq!(strip(&first[0]), strip(&serial[0]), "{method}");
    }
}

#[test]
fn gibbs_table_agrees_with_dense_reference() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmemory(&["gibbs", "--model", "kitaev", "--size", "2", "--beta", "0.6", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.path().join("gibbs.csv"))
        .unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["operator", "pauli", "ground", "gibbs", "exact_diagonalization"]
    );
    let mut n = 0;
    for r in rdr.records() {
        let r = r.unwrap();
        let gibbs: f64 = r[3].parse().unwrap();
        let ed: f64 = r[4].parse().unwrap();
        assert!((gibbs - ed).abs() < 1e-12, "{r:?}");
        n += 1;
    }
    assert!(n > 8);
}

#[test]
fn lifetime_scan_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmemory(&[
        "lifetime-scan", "--model", "kitaev", "--size", "2", "--sizes", "2,3", "--beta", "0.8", "--t-min", "0.01",
        "--t-max", "100", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.path().join("lifetimes.csv"))
        .unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(&r[2], "exact-reduced");
        let tau: f64 = r[3].parse().unwrap();
        assert!(tau.is_finite() && tau > 0.0);
        assert!(["good", "few-points", "non-exponential", "no-decay"].contains(&&r[6]), "{r:?}");
    }
    assert_eq!(&rows[0][6], "good");
    let o = qmemory(&["lifetime-scan", "--model", "kitaev", "--size", "2", "--sizes", "40", "--beta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qmemory(&["lifetime-scan", "--model", "kitaev", "--size", "2", "--sizes", "2,6", "--beta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("auto"));
}

#[test]
fn auto_scan_switches_to_sampling_on_large_lattices() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmemory(&[
        "lifetime-scan", "--model", "kitaev", "--size", "2", "--sizes", "2,6", "--beta", "1.0", "--method", "auto",
        "--n-traj", "4000", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.path().join("lifetimes.csv"))
        .unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!((&rows[0][2], &rows[1][2]), ("exact-reduced", "kmc"));
    let (tau, lo, hi): (f64, f64, f64) = (rows[1][3].parse().unwrap(), rows[1][4].parse().unwrap(), rows[1][5].parse().unwrap());
    assert!(lo < tau && tau < hi && hi - lo < tau, "{tau} [{lo}, {hi}]");
    let o = qmemory(&["autocorr", "--model", "kitaev", "--size", "2", "--beta", "1", "--method", "auto"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"model": {"kind": "ising_ring", "size": 4}, "beta": 0.5, "seed": 1}"#).unwrap();
    let out = dir.path().join("o");
    let o = qmemory(&[
        "autocorr", "--config", cfg.to_str().unwrap(), "--beta", "1.5", "--size", "6", "--times", "1", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["config"]["beta"], 1.5);
    assert_eq!(m["config"]["model"]["size"], 6);
    assert_eq!(m["config"]["seed"], 1);
    assert_eq!(m["config"]["coupling"], "x-only");
}
