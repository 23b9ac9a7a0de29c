use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SCENARIO: &str = r#""scenario": {
    "path_loss_los_db_at_1km": 103.8,
    "path_loss_exponent_los": 2.09,
    "path_loss_nlos_db_at_1km": 145.4,
    "path_loss_exponent_nlos": 3.75,
    "los_model": { "kind": "exp_square", "scale_km": 0.0825 }
  }"#;

fn udn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udn")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, format!("{{\n  {SCENARIO},\n{body}\n}}\n")).unwrap();
    path.to_str().unwrap().to_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_diagnostics_with_exit_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"  "densities": { "values_per_km2": [] },
  "load": { "kind": "partial", "user_density_per_km2": 1000, "reuse_factor": 2 },
  "energy": { "rho": 1.5 }"#,
    );
    let out = udn(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("rho"), "{err}");
    assert!(err.contains("density list is empty"), "{err}");
    assert!(err.contains("reuse"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn empty_density_list_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"  "densities": { "values_per_km2": [] }"#);
    let out_dir = dir.path().join("out");
    let out = udn(&["sweep", "--config", &cfg, "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
}

#[test]
fn sweep_then_fit_reproduces_the_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"  "densities": { "values_per_km2": [1, 5, 20, 50, 100, 300, 1000, 3000, 10000] },
  "power_search": {},
  "energy": {}"#,
    );
    let out_dir = dir.path().join("out");
    let out = udn(&["energy", "--config", &cfg, "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("# schema_version=1\nlambda_per_km2,"));
    assert_eq!(csv.lines().count(), 2 + 9);
    let fits = fs::read_to_string(out_dir.join("fits.txt")).unwrap();
    assert!(fits.contains("alpha=") && fits.contains("delta="));
    let optimum = fs::read_to_string(out_dir.join("optimum.txt")).unwrap();
    assert!(optimum.contains("energy efficiency argmax"));

    let refit = dir.path().join("refit.txt");
    let out = udn(&["fit", "--csv", s(&out_dir.join("sweep.csv")), "--config", &cfg, "--out", s(&refit)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(&refit).unwrap(), fits.as_bytes());
}

#[test]
fn monte_carlo_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"  "densities": { "values_per_km2": [100, 1000] },
  "monte_carlo": { "drops": 3000, "seed": 11 }"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(udn(&["sweep", "--config", &cfg, "--out", s(&a)]).status.code(), Some(0));
    assert_eq!(
        udn(&["sweep", "--config", &cfg, "--out", s(&b), "--threads", "1"]).status.code(),
        Some(0)
    );
    let ca = fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(ca, fs::read(b.join("sweep.csv")).unwrap());
    let text = String::from_utf8(ca).unwrap();
    let row = text.lines().nth(2).unwrap();
    assert!(row.split(',').nth(11).is_some_and(|c| !c.is_empty()), "{row}");

    let c = dir.path().join("c");
    udn(&["sweep", "--config", &cfg, "--out", s(&c), "--seed", "12"]);
    assert_ne!(fs::read(a.join("sweep.csv")).unwrap(), fs::read(c.join("sweep.csv")).unwrap());

    let out = udn(&["mc", "--config", &cfg, "--out", s(&c), "--mc-drops", "500"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(c.join("mc.csv")).unwrap().lines().count(), 4);
}

#[test]
fn per_density_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"  "densities": { "values_per_km2": [100] },
  "power_search": { "steps_db": [0.001], "max_steps_per_level": 2 }"#,
    );
    let out_dir = dir.path().join("out");
    let out = udn(&["power", "--config", &cfg, "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(2));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().ends_with("power_search_failure"));
}

#[test]
fn power_requires_its_block() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"  "densities": { "values_per_km2": [100] }"#);
    assert_eq!(udn(&["power", "--config", &cfg, "--out", s(dir.path())]).status.code(), Some(1));
}

#[test]
fn claims_subcommand_writes_json() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("claims.json");
    let out = udn(&["claims", "--only", "reuse-trade-off", "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], 1);
    assert_eq!(json["results"][0]["criterion"], 12);
    assert!(String::from_utf8_lossy(&out.stdout).contains("[PASS]"));
}
