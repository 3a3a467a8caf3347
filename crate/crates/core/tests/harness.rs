use std::path::PathBuf;
use std::process::Command;

use wgspec::eigen::SparseHermitian;
use wgspec::harness::{
    dump_operator, oracle_lambda02, read_distances_csv, run_experiment, validate_config, write_outputs,
    ExperimentConfig, Level,
};
use wgspec::reference::convergence_fit;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&configs().join(name)).unwrap()
}

const SMALL_HOLLOW: &str = r#"{
    "curve": {"name": "line", "x_min": -6, "x_max": 6},
    "fiber": {"kind": "circle", "scale": "1 + 0.3*sech(x)"},
    "potential": "uniform(0.2,0,0.3)",
    "sigma": 1,
    "variants": ["hollow_strong"],
    "epsilons": [0.2, 0.1, 0.05],
    "C": 0.3,
    "grid": {"n_x": 150, "n_y": 32, "n_eigs": 5},
    "tolerances": {"min_slope": 0.8}
}"#;

#[test]
fn flat_hollow_cylinder_distances_vanish() {
    let cfg = load("flat_hollow.json");
    assert!(validate_config(&cfg).is_empty());
    let rec = run_experiment(&cfg, Some(2)).unwrap();
    assert_eq!(rec.distances.len(), 3);
    for d in &rec.distances {
        assert!(d.hausdorff_rescaled < 1e-6, "{d:?}");
        assert!(d.count_reference > 0 && d.count_reference == d.count_variant);
    }
    assert!(rec.pass);
}

#[test]
fn centred_disk_moderate_matches_nonmagnetic() {
    let cfg = load("rigid_moderate_null.json");
    assert!(validate_config(&cfg).is_empty());
    let rec = run_experiment(&cfg, None).unwrap();
    assert_eq!(rec.reference, "nonmagnetic");
    for d in &rec.distances {
        assert!(d.hausdorff_raw < 1e-8, "{d:?}");
    }
    assert!(rec.pass);
}

#[test]
fn run_is_reproducible_and_slopes_match_persisted_distances() {
    let cfg = ExperimentConfig::from_json(SMALL_HOLLOW).unwrap();
    let a = run_experiment(&cfg, Some(1)).unwrap();
    let b = run_experiment(&cfg, Some(3)).unwrap();
    assert_eq!(a.config_hash, b.config_hash);
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.distances, b.distances);
    assert_eq!(a.slopes, b.slopes);

    let dir = tempfile::tempdir().unwrap();
    write_outputs(&cfg, &a, dir.path()).unwrap();
    for f in ["full.csv", "hollow_strong.csv", "distances.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let rows = read_distances_csv(&std::fs::read_to_string(dir.path().join("distances.csv")).unwrap()).unwrap();
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.1, r.2)).collect();
    let fit = convergence_fit(&pts).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let slope = summary["slopes"][0]["slope"].as_f64().unwrap();
    assert_eq!(slope, fit.slope);
    assert_eq!(summary["config_hash"].as_str().unwrap(), cfg.hash());

    let table = std::fs::read_to_string(dir.path().join("full.csv")).unwrap();
    assert!(table.starts_with("epsilon,index,lambda_raw,lambda_rescaled\n"));
    assert_eq!(table.lines().count(), 1 + 3 * 5);
}

#[test]
fn validate_reports_problems() {
    let mut cfg = load("hollow_bump_strong.json");
    assert!(validate_config(&cfg).is_empty());

    cfg.curve.name = "circle(1)".into();
    cfg.epsilons = vec![1.5, 0.5];
    let codes: Vec<String> = validate_config(&cfg).into_iter().map(|d| d.code).collect();
    assert!(codes.contains(&"AdmissibilityViolated".to_string()), "{codes:?}");
    assert!(codes.contains(&"ClosedCurveUnsupported".to_string()), "{codes:?}");

    let seam = load("square_seam.json");
    let d = validate_config(&seam);
    assert_eq!(d.len(), 1, "{d:?}");
    assert_eq!(d[0].code, "SeamIncompatible");
    assert_eq!(d[0].level, Level::Error);

    let mut big = load("rigid_strong_axial.json");
    big.grid.n_x = 2000;
    let codes: Vec<String> = validate_config(&big).into_iter().map(|d| d.code).collect();
    assert_eq!(codes, vec!["MemoryBudget".to_string()]);

    let mut bad = load("flat_hollow.json");
    bad.epsilons = vec![0.1, 0.2];
    bad.variants = vec!["rigid_strong".into()];
    let codes: Vec<String> = validate_config(&bad).into_iter().map(|d| d.code).collect();
    assert!(codes.contains(&"InvalidInput".to_string()));
    assert!(codes.contains(&"UnsupportedFiber".to_string()));
    assert!(run_experiment(&bad, None).is_err());
}

#[test]
fn dump_operator_round_trips() {
    let cfg = ExperimentConfig::from_json(SMALL_HOLLOW).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = dump_operator(&cfg, "hollow_strong", 0.1, dir.path()).unwrap();
    let m = SparseHermitian::<num_complex::Complex64>::from_matrix_market(&std::fs::read_to_string(&files.matrix).unwrap())
        .unwrap();
    assert_eq!(m.dim(), 150);
    assert!(m.is_hermitian());
    let csv = std::fs::read_to_string(&files.table).unwrap();
    assert!(csv.starts_with("x,m,V,theta\n"));
    assert_eq!(csv.lines().count(), 151);

    let files = dump_operator(&cfg, "full", 0.1, dir.path()).unwrap();
    let m = SparseHermitian::<num_complex::Complex64>::from_matrix_market(&std::fs::read_to_string(&files.matrix).unwrap())
        .unwrap();
    assert_eq!(m.dim(), 150 * 32);
    assert!(dump_operator(&cfg, "nonsense", 0.1, dir.path()).is_err());
}

#[test]
fn circle_oracle_is_exact() {
    let rep = oracle_lambda02(&load("flat_hollow.json")).unwrap();
    assert_eq!(rep.resolvent, 0.25);
    assert!(rep.pass);
}

#[test]
fn cli_subcommands() {
    let exe = env!("CARGO_BIN_EXE_wgspec");
    let out = Command::new(exe)
        .args(["validate", configs().join("flat_hollow.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[]");

    let out = Command::new(exe)
        .args(["validate", configs().join("square_seam.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("SeamIncompatible"));

    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(exe)
        .args(["run", configs().join("flat_hollow.json").to_str().unwrap(), "--threads", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("summary.json").exists());

    let out = Command::new(exe)
        .args(["dump-operator", configs().join("flat_hollow.json").to_str().unwrap()])
        .args(["--variant", "hollow_strong", "--eps", "0.1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("hollow_strong_eps0.1.mtx").exists());

    let out = Command::new(exe).args(["run", "/nonexistent.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
