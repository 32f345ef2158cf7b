use std::path::Path;
use std::process::{Command, Output};

use maglab_cli::config::{Backend, ExperimentConfig, KappaSpec};
use maglab_cli::{execute, Task};
use proptest::prelude::*;

fn maglab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maglab")).args(args).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn only_run_dir(root: &Path) -> std::path::PathBuf {
    let dirs: Vec<_> = std::fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs[0].clone()
}

#[test]
fn structural_on_flat_torus_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = maglab(&["verify", "--backend", "flat-torus", "--battery", "structural"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dir = only_run_dir(tmp.path());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 30);
    for r in rows {
        assert!(r["residual"].as_f64().unwrap() <= 1e-10, "{r}");
        assert_eq!(r["pass"], true);
        assert!(!r["anchor"].as_str().unwrap().is_empty());
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_sha256"], report["config_sha256"]);
    assert_eq!(manifest["files"].as_array().unwrap().len(), 1);
}

#[test]
fn bolza_spectrum_has_eight_equal_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = maglab(&["spectrum", "--backend", "bolza", "--kappa", "0.6", "--classes", "g1..g8"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(only_run_dir(tmp.path()).join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("class_key,period,closure_defect,monodromy_trace"));
    let periods: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(periods.len(), 8);
    assert!(periods.iter().all(|p| (p - 3.82143).abs() < 1e-5), "{periods:?}");
}

#[test]
fn zero_sigma_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = maglab(&["verify", "--battery", "carleman", "--sigma", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("sigma") && err.contains("strict"), "{err}");
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn failed_assertion_exits_one_and_still_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    // the flat torus without field is not negatively curved
    let o = maglab(&["verify", "--backend", "flat-torus", "--battery", "carleman"], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stderr(&o).contains("negativity"));
    assert!(only_run_dir(tmp.path()).join("report.json").exists());
}

#[test]
fn bad_config_file_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\n[system]\nbackend = \"sphere\"\n").unwrap();
    let o = maglab(&["verify", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_maglab")).args(["verify", "--no-such-flag"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn print_config_roundtrips_through_a_file() {
    let o = Command::new(env!("CARGO_BIN_EXE_maglab")).arg("print-config").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in ["seed", "output_dir", "[system]", "[battery]", "[resolution]", "[carleman]", "[spectrum]", "[deform]", "k_max"] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("c.toml");
    std::fs::write(&path, &text).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_maglab")).args(["print-config", "--config", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(stdout(&o), text);
}

#[test]
fn list_batteries_names_anchors() {
    let o = Command::new(env!("CARGO_BIN_EXE_maglab")).arg("list-batteries").output().unwrap();
    let text = stdout(&o);
    for needle in ["pestov (Pestov identity", "carleman (weighted Carleman estimate)", "jacobi (Jacobi equation"] {
        assert!(text.contains(needle), "{text}");
    }
}

#[test]
fn randomized_batteries_need_a_seed() {
    let cfg = ExperimentConfig { seed: None, ..ExperimentConfig::default() };
    let mut structural = cfg.clone();
    structural.battery.names = vec!["structural".into()];
    assert!(matches!(execute(Task::Verify, &structural), Err(maglab_cli::CliError::Config(_))));
    let mut orbit = cfg;
    orbit.battery.names = vec!["orbit".into()];
    orbit.spectrum.classes = "g1".into();
    assert!(execute(Task::Verify, &orbit).unwrap().pass());
}

#[test]
fn class_list_must_match_backend() {
    let mut cfg = ExperimentConfig::default();
    cfg.system.backend = Backend::FlatTorus;
    cfg.system.kappa = KappaSpec::Constant { value: 0.0 };
    assert!(matches!(execute(Task::Spectrum, &cfg), Err(maglab_cli::CliError::Config(_))));
    cfg.spectrum.classes = "(1,0), (1,1)".into();
    let out = execute(Task::Spectrum, &cfg).unwrap();
    assert!(out.pass() && out.rows.len() == 2);
}

#[test]
fn range_validation() {
    let base = ExperimentConfig::default();
    let cases: Vec<Box<dyn Fn(&mut ExperimentConfig)>> = vec![
        Box::new(|c| c.carleman.k_max = 2),
        Box::new(|c| c.carleman.sweep = vec![1.0, -1.0]),
        Box::new(|c| c.battery.count = 0),
        Box::new(|c| c.battery.names = vec!["nope".into()]),
        Box::new(|c| c.resolution.torus = 1),
        Box::new(|c| c.deform.h_s = 1.0),
        Box::new(|c| c.deform.s_grid = vec![0.5]),
        Box::new(|c| c.spectrum.classes = "g9".into()),
        Box::new(|c| c.system.kappa = KappaSpec::Constant { value: f64::NAN }),
        Box::new(|c| c.seed = Some(u64::MAX)),
    ];
    for (i, f) in cases.iter().enumerate() {
        let mut c = base.clone();
        f(&mut c);
        assert!(c.validate().is_err(), "case {i} accepted");
    }
    assert!(base.validate().is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn config_toml_roundtrip(seed in proptest::option::of(0..=i64::MAX as u64), kappa in -0.9f64..0.9, count in 1usize..100, sigma in 0.01f64..5.0) {
        let mut c = ExperimentConfig::default();
        c.seed = seed;
        c.system.kappa = KappaSpec::Constant { value: kappa };
        c.battery.count = count;
        c.carleman.sigma = sigma;
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn reports_depend_only_on_config(seed in 0u64..1000) {
        let mut c = ExperimentConfig::default();
        c.seed = Some(seed);
        c.battery.names = vec!["fourier".into()];
        c.battery.count = 3;
        let a = execute(Task::Verify, &c).unwrap();
        let b = execute(Task::Verify, &c).unwrap();
        prop_assert_eq!(a, b);
    }
}
