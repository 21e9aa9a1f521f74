use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dstek(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dstek"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const VACUUM: &str = r#"{"medium": {"radii": [1.0], "permittivities": [[1.0, 0.0]]}, "k": 1.0, "delta": 0.0, "l_max": 3}"#;

#[test]
fn eigs_on_vacuum() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), VACUUM);
    let out = dir.path().join("out");
    let res = dstek(&["eigs", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let rows = read_csv(&out.join("spectrum.csv"));
    assert_eq!(
        rows[0],
        ["l", "multiplicity", "mu", "re_lambda", "im_lambda", "delta"]
    );
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        assert!(row[4].parse::<f64>().unwrap().abs() <= 1e-10);
    }
    let summary = read_json(&out.join("eigs.json"));
    for key in ["config", "version", "wall_time_s", "results"] {
        assert!(summary.get(key).is_some(), "{key} missing");
    }
    assert_eq!(
        summary["config"]["medium"]["permittivities"][0],
        serde_json::json!([1.0, 0.0])
    );
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"medium": {"radii": [1.0, 0.5], "permittivities": [[1,0],[1,0]]}, "k": 1.0, "l_max": 3}"#,
    );
    let out = dir.path().join("out");
    let res = dstek(&["eigs", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn assumption_violation_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"medium": {"radii": [1.0], "permittivities": [[1,0]]}, "k": 4.4934095, "l_max": 2}"#,
    );
    let res = dstek(&[
        "eigs",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("[1]"));
    let res = dstek(&[
        "check-k",
        "--config",
        &cfg,
        "--out",
        dir.path().join("c").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(
        read_json(&dir.path().join("c/check_k.json"))["results"]["all_clear"],
        false
    );
}

#[test]
fn absorbing_eigs_in_upper_half_plane() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"medium": {"radii": [0.5, 1.0], "permittivities": [[2,1],[1,0]]}, "k": 1.0, "delta": 0.5, "l_max": 8}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        dstek(&["eigs", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    for row in &read_csv(&out.join("spectrum.csv"))[1..] {
        assert!(row[4].parse::<f64>().unwrap() >= -1e-10);
    }
}

#[test]
fn sweep_delta_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"medium": {"radii": [1.0], "permittivities": [[1,0]]}, "k": 1.0, "l_max": 1, "plots": true,
            "sweep": {"degrees": [1], "deltas": [0.001, 0.003, 0.01, 0.03, 0.1]}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        dstek(&[
            "sweep-delta",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let fit = read_json(&out.join("sweep_delta.json"));
    let e = fit["results"]["fits"][0]["fitted_exponent"]
        .as_f64()
        .unwrap();
    assert!((0.9..=1.1).contains(&e), "{e}");
    let rows = read_csv(&out.join("sweep_delta.csv"));
    assert!(rows[1..]
        .iter()
        .any(|r| r[1].parse::<f64>().unwrap() == 0.0 && r[4].parse::<f64>().unwrap() == 0.0));
    assert!(out.join("sweep_l1.dat").exists());

    let empty = write_config(
        dir.path(),
        r#"{"medium": {"radii": [1.0], "permittivities": [[1,0]]}, "k": 1.0, "l_max": 1, "sweep": {"degrees": [1], "deltas": []}}"#,
    );
    assert_eq!(
        dstek(&[
            "sweep-delta",
            "--config",
            &empty,
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn perturb_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"medium": {"radii": [0.5, 1.0], "permittivities": [[3,0],[1,0]]}, "k": 1.0, "delta": 0.5, "l_max": 4,
            "perturb": {"offsets": [0.1, 0.01, 0.001], "layers": [0]}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        dstek(&["perturb", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let res = &read_json(&out.join("perturb.json"))["results"];
    assert_eq!(res["monotone"], true);
    assert!(res["family"][0].get("hausdorff").is_some());

    let same = write_config(
        dir.path(),
        r#"{"medium": {"radii": [1.0], "permittivities": [[2,0]]}, "k": 1.0, "l_max": 3, "perturb": {"offsets": [0.0]}}"#,
    );
    assert_eq!(
        dstek(&["perturb", "--config", &same, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let res = &read_json(&out.join("perturb.json"))["results"];
    assert_eq!(res["family"][0]["max_distance"], 0.0);
    assert_eq!(res["family"][0]["hausdorff"], 0.0);
}

#[test]
fn detect_vacuum_and_noise() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), VACUUM);
    let out = dir.path().join("out");
    assert_eq!(
        dstek(&["detect", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let rows = read_csv(&out.join("detect.csv"));
    assert_eq!(rows[0][0], "l");
    assert!(rows[1][5].parse::<f64>().unwrap() <= 1e-8);

    let noisy = write_config(
        dir.path(),
        r#"{"medium": {"radii": [0.5, 1.0], "permittivities": [[2,0],[1,0]]}, "k": 1.0, "l_max": 6,
            "detect": {"method": "grid", "window": [-60, 5], "points": 651, "noise": 1e-6}}"#,
    );
    let res = dstek(&[
        "detect",
        "--config",
        &noisy,
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert_eq!(res.status.code(), Some(0));
    let summary = read_json(&out.join("detect.json"));
    assert!(summary["results"]["max_relative_error"].as_f64().unwrap() <= 1e-4);
    assert!(summary["results"].get("lower_half_plane_warning").is_some());
}

#[test]
fn format_flag_selects_files() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), VACUUM);
    let csv = dir.path().join("csv");
    let json = dir.path().join("json");
    dstek(&[
        "eigs",
        "--config",
        &cfg,
        "--out",
        csv.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    dstek(&[
        "eigs",
        "--config",
        &cfg,
        "--out",
        json.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(csv.join("spectrum.csv").exists() && !csv.join("eigs.json").exists());
    assert!(!json.join("spectrum.csv").exists() && json.join("eigs.json").exists());
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"medium": {"radii": [0.3, 0.7, 1.0], "permittivities": [[4,0.2],[2,0],[1.5,0]]}, "k": 1.3, "delta": 0.7, "l_max": 25}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    dstek(&[
        "eigs",
        "--config",
        &cfg,
        "--out",
        a.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    dstek(&[
        "eigs",
        "--config",
        &cfg,
        "--out",
        b.to_str().unwrap(),
        "--threads",
        "4",
    ]);
    assert_eq!(
        std::fs::read(a.join("spectrum.csv")).unwrap(),
        std::fs::read(b.join("spectrum.csv")).unwrap()
    );
}

#[test]
fn selftest_passes_and_forced_failure_fails() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("st");
    let res = dstek(&["selftest", "--out", out.to_str().unwrap()]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );
    let report = read_json(&out.join("selftest_report.json"));
    let names: Vec<&str> = report["invariants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"wronskian") && names.contains(&"detection_exact"));
    let res = dstek(&[
        "selftest",
        "--out",
        out.to_str().unwrap(),
        "--force-failure",
    ]);
    assert_ne!(res.status.code(), Some(0));
}

#[test]
fn missing_config_is_a_config_error() {
    assert_eq!(dstek(&["eigs"]).status.code(), Some(2));
    assert_eq!(
        dstek(&["eigs", "--config", "/nonexistent/run.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dstek(&["bogus"]).status.code(), Some(2));
}
