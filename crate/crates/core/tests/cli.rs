//! End-to-end checks of the `undulant` binary: exit codes, artifacts and
//! thread-count independence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn undulant(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_undulant"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("UNDULANT_THREADS", n);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn small_symmetrization(out: &Path) -> Value {
    json!({
        "scenario": "symmetrization",
        "params": { "alpha": 0.25, "epsilon": 0.01, "gamma": 0.01 },
        "profile": { "kind": "sinusoidal", "base_radius": 0.2, "undulation_amplitude": 0.25, "periods": 2 },
        "grid": { "nx": 64, "ntheta": 16, "length": 40.0 },
        "stepper": { "dt": 0.1 },
        "t_final": 2.0,
        "perturbation": { "mode": 1, "amplitude": 0.05, "component": 1 },
        "seed": 3,
        "output_dir": out,
        "probe_stride": 2,
        "snapshot_every": 10
    })
}

fn small_pulse(out: &Path) -> Value {
    json!({
        "scenario": "pulse_speed",
        "params": { "alpha": 0.25, "epsilon": 0.001, "gamma": 0.001 },
        "profile": { "kind": "constant", "base_radius": 1.0 },
        "grid": { "nx": 512, "ntheta": 8, "length": 100.0 },
        "stepper": { "dt": 0.05, "scheme": "imex_cn" },
        "t_final": 150.0,
        "output_dir": out,
        "probe_stride": 20,
        "pulse": { "alphas": [0.25, 0.1, 0.2] },
        "thresholds": { "speed_rel": 0.2 }
    })
}

fn canonical_configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths
}

#[test]
fn canonical_configs_validate() {
    let paths = canonical_configs();
    assert_eq!(paths.len(), 5);
    for path in paths {
        let out = undulant(&["validate", path.to_str().unwrap()], None);
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert_eq!(out.status.code(), Some(0), "{}: {stdout}", path.display());
        assert!(stdout.trim_end().ends_with("ok"));
    }
}

#[test]
fn validate_reports_field_paths() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_symmetrization(dir.path());
    cfg["perturbation"]["amplitude"] = json!(-0.1);
    let path = write_config(dir.path(), "bad.json", &cfg);
    let out = undulant(&["validate", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches("error").count(), 1, "{stdout}");
    assert!(stdout.contains("perturbation.amplitude"), "{stdout}");

    let path = dir.path().join("typo.json");
    fs::write(&path, r#"{"scenario": "symmetrization", "grid": {"nx": "many"}}"#).unwrap();
    let out = undulant(&["validate", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.nx"));
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("ok");
    let path = write_config(dir.path(), "ok.json", &small_symmetrization(&out_dir));
    let out = undulant(&["run", path.to_str().unwrap()], None);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let summary: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario"], "symmetrization");
    assert_eq!(summary["seed"], 3);

    let mut strict = small_symmetrization(&dir.path().join("strict"));
    strict["thresholds"] = json!({ "rate_factor": 1e9 });
    let path = write_config(dir.path(), "strict.json", &strict);
    let out = undulant(&["run", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL decay_rate"));

    let path = dir.path().join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    assert_eq!(undulant(&["run", path.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(
        undulant(&["run", "/nonexistent/config.json"], None).status.code(),
        Some(2)
    );
}

#[test]
fn artifacts_follow_the_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let path = write_config(dir.path(), "cfg.json", &small_symmetrization(&out_dir));
    undulant(&["run", path.to_str().unwrap()], None);

    let csv = fs::read_to_string(out_dir.join("timeseries.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("t,X0,X1,Xc,Y1,W,perp_h10,avg_h10,gap_h10,pulse_x")
    );
    assert_eq!(csv.lines().count(), 1 + 11);

    let snaps: Vec<PathBuf> = fs::read_dir(out_dir.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert!(!snaps.is_empty());
    let bytes = fs::read(&snaps[0]).unwrap();
    assert_eq!(&bytes[..4], b"UNDU");
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 0);
    let nx = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let nt = u64::from_le_bytes(bytes[24..32].try_into().unwrap());
    assert_eq!((nx, nt), (64, 16));
    assert_eq!(bytes.len(), 32 + 2 * 64 * 16 * 8);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("run{k}"));
        let path = write_config(dir.path(), &format!("cfg{k}.json"), &small_symmetrization(&out_dir));
        undulant(&["run", path.to_str().unwrap()], None);
        csvs.push(fs::read(out_dir.join("timeseries.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(threads);
        let path = write_config(dir.path(), &format!("pulse{threads}.json"), &small_pulse(&out_dir));
        let out = undulant(&["run", path.to_str().unwrap()], Some(threads));
        let log = String::from_utf8_lossy(&out.stdout) + String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(0), "{log}");
        let files: Vec<Vec<u8>> = (0..3)
            .flat_map(|k| [format!("crossings_{k}.csv"), format!("pulse_{k}.csv")])
            .map(|f| fs::read(out_dir.join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let crossings = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert_eq!(crossings.lines().next(), Some("t,x_front"));
}

#[test]
fn selftest_passes() {
    let out = undulant(&["selftest", "--seed", "11"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
