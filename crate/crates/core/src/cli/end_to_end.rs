//! Whole subcommands driven through the same entry point as the binary.

use std::fs;
use std::path::Path;

use clap::Parser;

use super::{execute, exit_code, Cli, Outcome};
use crate::error::Result;

const SMALL: &str = r#"
[background]
kind = "schwarzschild"

[modes]
l_max = 1

[grid]
r_min = -30.0
r_max = 50.0
h = 0.2

[solver]
t_end = 20.0

[data]
center = 5.0
width = 1.5

[estimates]
b_scan = [0.05, 0.2]
phase_modes = [2, 4]
samples = 4
t_ref = 5.0

[output]
cadence = 10
"#;

fn run_in(sub: &str, config: &str, out: &Path) -> Result<Outcome> {
    let path = out.join("run.toml");
    fs::create_dir_all(out).unwrap();
    fs::write(&path, config).unwrap();
    execute(
        &Cli::try_parse_from(["rwlab", sub, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .unwrap(),
    )
}

fn failure(r: &Result<Outcome>) -> String {
    match r {
        Ok(o) => o.summary.clone(),
        Err(e) => e.to_string(),
    }
}

#[test]
fn check_on_schwarzschild_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("check", SMALL, dir.path());
    assert_eq!(exit_code(&o), 0, "{}", failure(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("conditions.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn check_on_quadratic_warp_reports_failure() {
    let dir = tempfile::tempdir().unwrap();
    let config = SMALL.replace("kind = \"schwarzschild\"", "kind = \"warped\"");
    let o = run_in("check", &config, dir.path());
    assert_eq!(exit_code(&o), 1, "{}", failure(&o));
}

#[test]
fn invalid_sigma_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = SMALL.replace("[estimates]", "[estimates]\nsigma = 0.5");
    let o = run_in("evolve", &config, dir.path());
    assert_eq!(exit_code(&o), 2);
    assert!(failure(&o).contains("estimates.sigma"), "{}", failure(&o));
}

#[test]
fn cfl_above_bound_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let config = SMALL.replace("t_end = 20.0", "t_end = 20.0\ncfl = 1.5");
    let o = run_in("evolve", &config, dir.path());
    assert_eq!(exit_code(&o), 2);
    assert!(failure(&o).contains("cfl"), "{}", failure(&o));
}

#[test]
fn unknown_key_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("potential", "[background]\nkind = \"schwarzschild\"\nspin = 0.5\n", dir.path());
    assert_eq!(exit_code(&o), 2);
    assert!(failure(&o).contains("line 3"), "{}", failure(&o));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = execute(&Cli::try_parse_from(["rwlab", "potential", "--config", "/nonexistent/run.toml"]).unwrap());
    assert_eq!(exit_code(&o), 2);
}

#[test]
fn zero_amplitude_gives_zero_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = SMALL.replace("width = 1.5", "width = 1.5\namplitude = 0.0");
    let o = run_in("evolve", &config, dir.path());
    assert_eq!(exit_code(&o), 0, "{}", failure(&o));
    let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(!rows.is_empty());
    for row in rows {
        let mut cols = row.split(',');
        cols.next();
        assert!(cols.all(|v| v.parse::<f64>().unwrap() == 0.0), "{row}");
    }
}

#[test]
fn zero_duration_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = SMALL.replace("t_end = 20.0", "t_end = 0.0");
    let o = run_in("evolve", &config, dir.path());
    assert_eq!(exit_code(&o), 0, "{}", failure(&o));
    let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn summary_echoes_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("evolve", SMALL, dir.path());
    assert_eq!(exit_code(&o), 0, "{}", failure(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["background"]["kind"], "schwarzschild");
    assert_eq!(summary["config"]["grid"]["h"], 0.2);
    assert_eq!(summary["steps"], 200);
}

#[test]
fn potential_lists_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("potential", SMALL, dir.path());
    assert_eq!(exit_code(&o), 0, "{}", failure(&o));
    let peaks: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("peaks.json")).unwrap()).unwrap();
    let rows = peaks["peaks"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let r = rows[1]["area_radius"].as_f64().unwrap();
    let exact = crate::background::schwarzschild_peak_radius(2.0, 1.0);
    assert!((r - exact).abs() < 0.05, "{r} vs {exact}");
    assert!(dir.path().join("potential.csv").exists());
}

#[test]
fn repeated_runs_are_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        assert_eq!(run_in("verify-estimates", SMALL, dir.path()).map(|o| o.files.len()).unwrap_or(0), 2);
    }
    for name in ["diagnostics.csv", "estimates.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
