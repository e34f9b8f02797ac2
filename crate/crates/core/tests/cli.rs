use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn semideg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semideg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn run_preset(command: &str, preset: &str, extra: &str) -> (i32, Value, TempDir) {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_config(
        dir.path(),
        &format!(
            "output = \"{}\"\n{extra}\n[problem]\npreset = \"{preset}\"\n",
            out.display()
        ),
    );
    let result = semideg(&[command, "--config", &config, "--quiet"]);
    let code = result.status.code().unwrap();
    let text = fs::read_to_string(out.join("report.json"))
        .unwrap_or_else(|_| panic!("no report: {}", String::from_utf8_lossy(&result.stderr)));
    (code, serde_json::from_str(&text).unwrap(), dir)
}

#[test]
fn verify_formula_passes_on_the_scalar_linear_preset() {
    let (code, report, _dir) = run_preset("verify-formula", "scalar-linear", "");
    assert_eq!(code, 0);
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["schema"], 1);
    assert_eq!(report["command"], "verify-formula");
    assert_eq!(report["theorem"], "krasnoselskii-formula");
}

#[test]
fn degree_of_the_identity_on_the_unit_ball_is_one() {
    let (code, report, _dir) = run_preset("degree", "identity", "");
    assert_eq!(code, 0);
    assert_eq!(report["value"], 1);
}

#[test]
fn find_periodic_on_the_transmission_line() {
    let (code, report, dir) = run_preset("find-periodic", "txline-default", "");
    assert_eq!(code, 0);
    assert!(report["closure_defect"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["norm_bound_ok"], true);
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,x_1,x_2,"));
    assert_eq!(
        header.split(',').count(),
        1 + report["initial_state"].as_array().unwrap().len()
    );
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let read = |dir: &TempDir| fs::read(dir.path().join("out/report.json")).unwrap();
    let (_, _, a) = run_preset("check-hypotheses", "heat-1d", "seed = 7");
    let (_, _, b) = run_preset("check-hypotheses", "heat-1d", "seed = 7");
    assert_eq!(read(&a), read(&b));
    let (_, _, c) = run_preset("degree", "cubic-2d", "");
    let (_, _, d) = run_preset("degree", "cubic-2d", "");
    assert_eq!(read(&c), read(&d));
}

#[test]
fn hypothesis_failures_exit_with_status_one() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let config = write_config(
        dir.path(),
        &format!(
            "output = \"{}\"\n[problem.transmission_line]\nlip_f = 10.0\n",
            out.display()
        ),
    );
    let result = semideg(&["check-hypotheses", "--config", &config, "--quiet"]);
    assert_eq!(result.status.code(), Some(1));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["all_passed"], false);
    let failed: Vec<&str> = report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["passed"] == false)
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"example-2"), "{failed:?}");
}

#[test]
fn malformed_config_exits_with_a_line_numbered_error() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "seed = 3\n\n[problem]\npreset = \"identity\"\nnu = = 2\n",
    );
    let result = semideg(&["degree", "--config", &config]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("line 5"), "{stderr}");
}

#[test]
fn unknown_command_and_preset_exit_with_status_two() {
    assert_eq!(semideg(&["levitate"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "[problem]\npreset = \"no-such-problem\"\n");
    assert_eq!(
        semideg(&["degree", "--config", &config]).status.code(),
        Some(2)
    );
}

#[test]
fn steps_override_reaches_the_integrator() {
    let (code, report, dir) = run_preset(
        "integrate",
        "scalar-linear",
        "[integrate]\nx0 = [0.0]\nhorizon = 1.0",
    );
    assert_eq!(code, 0);
    assert!(report["within_apriori_bound"].as_bool().unwrap());
    // u' = -u + 1 from 0
    let exact = 1.0 - (-1.0f64).exp();
    assert!((report["final_state"][0].as_f64().unwrap() - exact).abs() < 1e-8);

    let config = dir.path().join("run.toml").display().to_string();
    let out = dir.path().join("coarse");
    let result = semideg(&[
        "integrate",
        "--config",
        &config,
        "--steps",
        "8",
        "--output",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(result.status.code(), Some(0));
    let coarse: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(coarse["steps"], 8);
}
