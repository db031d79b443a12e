//! Scenario files, logs, determinism and the CLI.

mod common;

use std::path::Path;
use std::process::Command;

use cooplift::harness::{metrics, run, EventKind, Scenario, COLUMNS};
use cooplift::verify;

fn scenarios_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios"))
}

#[test]
fn every_shipped_scenario_loads() {
    let mut n = 0;
    for entry in std::fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 4);
}

#[test]
fn scenario_round_trips_through_toml() {
    let s = verify::lift_guide_land_scenario().unwrap();
    let back = Scenario::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
    assert_eq!(s, back);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(Scenario::from_toml_str("duration = 3.0").is_err());
    assert!(Scenario::from_toml_str("[position]\nkp = [1.0, 1.0, 1.0]").is_err());
}

#[test]
fn same_seed_same_log() {
    let mut s = verify::push_scenario(0, 1.0, 2.0);
    s.admittance.sensor_noise_std_n = 0.3;
    let a = run(&s).unwrap().to_csv_string().unwrap();
    let b = run(&s).unwrap().to_csv_string().unwrap();
    assert_eq!(a, b);
    s.seed += 1;
    let c = run(&s).unwrap().to_csv_string().unwrap();
    assert_ne!(a, c);
}

#[test]
fn lift_guide_land_matches_golden_log() {
    let log = run(&verify::lift_guide_land_scenario().unwrap()).unwrap();
    let diff = common::check_golden(&log).unwrap();
    assert!(diff <= common::GOLDEN_TOL, "golden drift {diff:e}");
}

#[test]
fn csv_header_matches_columns() {
    let mut s = Scenario::default();
    s.duration_s = 0.05;
    let text = run(&s).unwrap().to_csv_string().unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header, COLUMNS);
    assert_eq!(text.lines().count(), 1 + 5);
}

#[test]
fn doubled_cross_term_drifts_on_idle_axes() {
    // with −E_p the doubled cross term leaves a slow unstable mode on any
    // axis whose adaptive gain is still below 1/k_p
    let mut s = verify::step_scenario(0, 40.0);
    s.position.law = cooplift::position_ctrl::PositionLaw::CrossTermDoubling;
    let log = run(&s).unwrap();
    let z = |t: f64| log.rows.iter().find(|r| r.t() >= t).unwrap().ep.z.abs();
    assert!(z(39.0) > 2.0 * z(10.0), "z error {} → {}", z(10.0), z(39.0));

    s.position.law = cooplift::position_ctrl::PositionLaw::CrossTermCancelling;
    let log = run(&s).unwrap();
    let z = |t: f64| log.rows.iter().find(|r| r.t() >= t).unwrap().ep.z.abs();
    assert!(z(39.0) < z(10.0));
}

#[test]
fn unclamped_step_trips_the_divergence_guard() {
    let mut s = verify::step_scenario(0, 2.0);
    s.position.max_tilt_cmd_rad = 1.5;
    s.position.anti_windup = false;
    let log = run(&s).unwrap();
    assert!(log.diverged());
    assert!(log.last().unwrap().is_finite());
}

#[test]
fn frozen_loop_holds_hover_thrust() {
    let s = verify::reaching_scenario([0.3, 0.0, 0.0], [0.0; 3]);
    let log = run(&s).unwrap();
    let w = s.system_params().hover_thrust();
    assert!(log.rows.iter().all(|r| r.wrench.thrust == w));
    assert_eq!(log.count(EventKind::ThrustSingularity), 0);
}

#[test]
fn summary_serializes() {
    let s = verify::step_scenario(2, 3.0);
    let log = run(&s).unwrap();
    let m = metrics(&log, &s.attitude_gains());
    let json = serde_json::to_value(&m).unwrap();
    assert_eq!(json["status"]["status"], "completed");
    assert_eq!(json["rows"], 300);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cooplift"))
}

#[test]
fn cli_run_writes_log_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["run", "--scenario"])
        .arg(scenarios_dir().join("hover.toml"))
        .arg("--out")
        .arg(dir.path())
        .args(["--dt", "0.002", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("log.csv")).unwrap();
    assert!(csv.starts_with("t_s,"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario"], "hover");
    assert!(dir.path().join("events.json").exists());
}

#[test]
fn cli_allocate_splits_hover_evenly() {
    let out = cli().args(["allocate", "--thrust", "31.8825"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for q in v["quadrotors"].as_array().unwrap() {
        assert!((q["thrust_n"].as_f64().unwrap() - 15.94125).abs() < 1e-12);
    }
    assert!(v["rotor_speeds_radps"].is_array());
}

#[test]
fn cli_allocate_names_the_saturated_rotor() {
    let out = cli().args(["allocate", "--thrust", "31.8825", "--moment", "0", "0", "-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["rotor_error"].as_str().unwrap().contains("rotor"));
}

#[test]
fn cli_rejects_bad_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "dt_s = 0.5\n").unwrap();
    let out = cli().args(["run", "--scenario"]).arg(&bad).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt_s"));
}
