//! End-to-end tests of the `plasmo` binary: output formats, determinism,
//! and the exit-code contract (0 success, 2 invalid inputs, 3 pipeline
//! failure).

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn plasmo() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plasmo"))
}

fn write_scenario(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.json");
    std::fs::write(&path, body).unwrap();
    path
}

/// Lossless reference scenario with a modest sweep grid.
fn reference_scenario() -> String {
    r#"{
      "domain": { "center": [0.0, 0.0, 0.0], "radius": 2.0 },
      "host": { "eps0_real": 2.0 },
      "medium": { "eps_inf": 1.0, "omega_p": 1.0, "omega_0": 1.0 },
      "particle": { "shape": "ball", "center": [0.2, 0.1, -0.3], "scale": 0.01 },
      "incident": { "direction": [0.0, 0.0, 1.0], "polarization": [1.0, 0.0, 0.0] },
      "sweep": { "loss_ratio_bound": 0.02, "n_omega": 120, "n_gamma": 24 }
    }"#
    .to_string()
}

fn stdout_json(output: &Output) -> Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn spectrum_reports_the_ball_modes() {
    let output = plasmo().args(["spectrum", "--ball"]).output().unwrap();
    let json = stdout_json(&output);
    for d in json["tensor_diag"].as_array().unwrap() {
        assert!((d.as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }
    assert!((json["trace"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    let modes = json["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 3);
    for mode in modes {
        assert!((mode["lambda"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mode["subspace_tag"].as_i64().unwrap(), 3);
    }
}

#[test]
fn spectrum_requires_exactly_one_shape() {
    let output = plasmo().arg("spectrum").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn dispersion_matches_the_closed_form_reference() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &reference_scenario());
    let output = plasmo()
        .args(["dispersion", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    let json = stdout_json(&output);
    let roots = json.as_array().unwrap();
    assert_eq!(roots.len(), 1, "a ball has one visible eigenvalue");
    assert!((roots[0]["omega"].as_f64().unwrap() - 1.2_f64.sqrt()).abs() < 1e-10);
    assert_eq!(roots[0]["gamma"].as_f64().unwrap(), 0.0);
}

#[test]
fn sweep_output_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &reference_scenario());
    let grids = ["a.csv", "b.csv"].map(|name| dir.path().join(name));
    for grid in &grids {
        let status = plasmo()
            .args(["sweep", "--scenario"])
            .arg(&scenario)
            .arg("--out")
            .arg(grid)
            .env("PLASMO_THREADS", "2")
            .status()
            .unwrap();
        assert!(status.success());
    }
    let first = std::fs::read(&grids[0]).unwrap();
    let second = std::fs::read(&grids[1]).unwrap();
    assert_eq!(first, second, "identical runs must produce identical bytes");

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,gamma,I"));
    assert_eq!(lines.count(), 120 * 24);
}

#[test]
fn localize_lands_near_the_seeded_particle() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &reference_scenario());
    let output = plasmo()
        .args(["localize", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    let json = stdout_json(&output);
    let z: Vec<f64> =
        json["z_hat"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let err = ((z[0] - 0.2).powi(2) + (z[1] - 0.1).powi(2) + (z[2] + 0.3).powi(2)).sqrt();
    assert!(err <= 5.0 * 0.01, "localization error {err:.3e} exceeds five radii");
}

#[test]
fn invert_recovers_the_host_permittivity_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &reference_scenario());
    let mut runs = Vec::new();
    for _ in 0..2 {
        let output = plasmo()
            .args(["invert", "--scenario"])
            .arg(&scenario)
            .output()
            .unwrap();
        runs.push(output);
    }
    assert_eq!(runs[0].stdout, runs[1].stdout, "inversion must be reproducible");

    let json = stdout_json(&runs[0]);
    let peaks = json["peaks"].as_array().unwrap();
    assert_eq!(peaks.len(), 1);
    assert!((peaks[0]["lambda_matched"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let eps0 = peaks[0]["eps0_recovered"].as_array().unwrap();
    let re = eps0[0].as_f64().unwrap();
    let im = eps0[1].as_f64().unwrap();
    assert!((re - 2.0).abs() <= 0.05, "recovered real part {re} too far from 2");
    assert!(im.abs() <= 0.05, "recovered imaginary part {im} too large");
}

#[test]
fn recorded_traces_feed_the_inversion() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), &reference_scenario());
    let traces = dir.path().join("traces");
    let status = plasmo()
        .args(["simulate", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&traces)
        .args(["--omega", "1.2", "--gamma", "0.005"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(traces.join("manifest.json").is_file());
    let trace_text = std::fs::read_to_string(traces.join("trace_0_particle.csv")).unwrap();
    assert!(trace_text.starts_with("t,p\n"));

    let from_traces = plasmo()
        .args(["invert", "--scenario"])
        .arg(&scenario)
        .arg("--traces")
        .arg(&traces)
        .output()
        .unwrap();
    let direct = plasmo()
        .args(["invert", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    let a = stdout_json(&from_traces);
    let b = stdout_json(&direct);

    // Both routes localize the same particle; the sweep stage is shared.
    for k in 0..3 {
        let za = a["z_hat"][k].as_f64().unwrap();
        let zb = b["z_hat"][k].as_f64().unwrap();
        assert!((za - zb).abs() < 1e-3, "trace and direct routes disagree on z[{k}]");
    }
    assert_eq!(a["peaks"], b["peaks"]);
}

#[test]
fn missing_inputs_fail_with_the_validation_code() {
    let dir = tempfile::tempdir().unwrap();

    let output = plasmo()
        .args(["invert", "--scenario"])
        .arg(dir.path().join("absent.json"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    let malformed = write_scenario(dir.path(), "{ not json");
    let output = plasmo().args(["invert", "--scenario"]).arg(&malformed).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("not valid"));

    let scenario = write_scenario(dir.path(), &reference_scenario());
    let output = plasmo()
        .args(["invert", "--scenario"])
        .arg(&scenario)
        .arg("--traces")
        .arg(dir.path().join("no-traces"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn degenerate_detectors_fail_with_the_pipeline_code() {
    let dir = tempfile::tempdir().unwrap();
    // Three detectors a hair apart on the boundary: the arrival stage works,
    // trilateration cannot.
    let body = reference_scenario().replace(
        "\"sweep\":",
        r#""detectors": [
          [2.0, 0.0, 0.0],
          [1.9999999999999998, 2.0e-8, 0.0],
          [1.9999999999999996, 4.0e-8, 0.0]
        ],
        "sweep":"#,
    );
    let scenario = write_scenario(dir.path(), &body);
    let output = plasmo().args(["invert", "--scenario"]).arg(&scenario).output().unwrap();
    assert_eq!(output.status.code(), Some(3), "pipeline failures must exit 3");
    assert!(
        String::from_utf8_lossy(&output.stderr).contains("trilateration"),
        "stderr must name the failing stage"
    );
}
