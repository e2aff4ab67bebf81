//! Implementations of the six subcommands.
//!
//! Error discipline: anything wrong with the inputs (files, scenario
//! values, recording geometry) is a [`CliError::Validation`]; a measurement
//! set that is well formed but defeats the imaging procedure is a
//! [`CliError::Pipeline`], whose message names the stage that gave up.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;

use plasmo_core::acoustic::synthesize_traces;
use plasmo_core::dispersion::resonance;
use plasmo_core::emfield::Scenario;
use plasmo_core::geometry::{Shape, DEFAULT_ORDER};
use plasmo_core::inversion::{
    indicator, localize, run_pipeline, synthesize_measurements, MeasurementSet,
};
use plasmo_core::spectral::{magnetization_tensor, visible_modes};

use crate::io::{
    background_trace_path, particle_trace_path, read_manifest, read_trace_csv, write_manifest,
    write_trace_csv, TraceManifest,
};
use crate::scenario::ScenarioFile;

#[derive(Debug)]
pub enum CliError {
    /// Bad inputs: unreadable or inconsistent files, invalid scenario
    /// values, malformed recordings. Exit code 2.
    Validation(String),
    /// The imaging procedure itself failed on well-formed inputs. Exit
    /// code 3.
    Pipeline(String),
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn pipeline(e: impl std::fmt::Display) -> CliError {
    CliError::Pipeline(e.to_string())
}

fn load(path: &Path) -> Result<(ScenarioFile, Scenario), CliError> {
    let file = ScenarioFile::load(path).map_err(CliError::Validation)?;
    let scenario = file.to_scenario().map_err(CliError::Validation)?;
    Ok((file, scenario))
}

fn print_json(value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(validation)?;
    println!("{text}");
    Ok(())
}

/// `spectrum`: magnetization tensor and visible modes of a shape.
pub fn spectrum(ball: bool, ellipsoid: Option<&str>) -> Result<(), CliError> {
    let shape = match (ball, ellipsoid) {
        (true, None) => Shape::Ball,
        (false, Some(text)) => {
            let axes: Vec<f64> = text
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Validation(format!("--ellipsoid: {e}")))?;
            if axes.len() != 3 {
                return Err(CliError::Validation(
                    "--ellipsoid takes three comma-separated semi-axes".into(),
                ));
            }
            Shape::ellipsoid(axes[0], axes[1], axes[2]).map_err(validation)?
        }
        _ => {
            return Err(CliError::Validation(
                "pass exactly one of --ball or --ellipsoid R1,R2,R3".into(),
            ))
        }
    };
    let tensor = magnetization_tensor(&shape).map_err(validation)?;
    let modes = visible_modes(&shape).map_err(validation)?;
    print_json(&json!({
        "tensor_diag": tensor.diag,
        "trace": tensor.trace(),
        "modes": modes.iter().map(|m| json!({
            "lambda": m.lambda,
            "axis": m.axis,
            "subspace_tag": m.subspace_tag,
            "mean": m.mean.map(|v| [v.x, v.y, v.z]),
        })).collect::<Vec<_>>(),
    }))
}

/// `dispersion`: closed-form sweep-square roots for chosen eigenvalues
/// (default: the scenario particle's visible modes).
pub fn dispersion(scenario_path: &Path, lambdas: &[f64]) -> Result<(), CliError> {
    let (_, scenario) = load(scenario_path)?;
    let lambdas: Vec<f64> = if lambdas.is_empty() {
        let modes = visible_modes(&scenario.particle.shape).map_err(validation)?;
        let mut unique: Vec<f64> = Vec::new();
        for mode in modes {
            if unique.last().is_none_or(|&l| (mode.lambda - l).abs() > 1e-12) {
                unique.push(mode.lambda);
            }
        }
        unique
    } else {
        lambdas.to_vec()
    };
    let mut roots = Vec::with_capacity(lambdas.len());
    for lambda in lambdas {
        let root = resonance(lambda, &scenario.host, &scenario.medium).map_err(validation)?;
        roots.push(json!({
            "lambda": root.lambda,
            "omega": root.omega,
            "gamma": root.gamma,
            "condition": root.condition,
        }));
    }
    print_json(&roots)
}

/// `simulate`: record boundary pressure trace pairs at one sweep point.
pub fn simulate(
    scenario_path: &Path,
    out_dir: &Path,
    omega: f64,
    gamma: f64,
    dt: Option<f64>,
    t_max: Option<f64>,
) -> Result<(), CliError> {
    let (file, scenario) = load(scenario_path)?;
    let detectors = file.detector_positions(&scenario.domain);
    let dt = dt.unwrap_or(2.5e-4 * scenario.domain.radius);
    // Default duration covers the farthest saturation radius (twice the
    // chamber radius for boundary detectors) with margin.
    let t_max = t_max.unwrap_or(2.4 * scenario.domain.radius);
    let pairs = synthesize_traces(&scenario, &detectors, omega, gamma, dt, t_max, DEFAULT_ORDER)
        .map_err(validation)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", out_dir.display())))?;
    write_manifest(
        out_dir,
        &TraceManifest {
            omega,
            gamma,
            dt,
            t_max,
            detectors: detectors.iter().map(|p| [p.x, p.y, p.z]).collect(),
        },
    )
    .map_err(CliError::Validation)?;
    for (k, pair) in pairs.iter().enumerate() {
        write_trace_csv(&background_trace_path(out_dir, k), &pair.background)
            .map_err(CliError::Validation)?;
        write_trace_csv(&particle_trace_path(out_dir, k), &pair.with_particle)
            .map_err(CliError::Validation)?;
    }
    eprintln!(
        "wrote {} trace pairs ({} samples each) to {}",
        pairs.len(),
        pairs[0].background.values.len(),
        out_dir.display()
    );
    Ok(())
}

/// `sweep`: record the indicator grid over the sweep square as CSV.
pub fn sweep(
    scenario_path: &Path,
    out_path: &Path,
    gamma_fixed: Option<f64>,
) -> Result<(), CliError> {
    let (file, scenario) = load(scenario_path)?;
    let detectors = file.detector_positions(&scenario.domain);
    let config = file.sweep_config(gamma_fixed);
    let ms = synthesize_measurements(&scenario, &detectors, &config).map_err(validation)?;

    let mut out = String::with_capacity(ms.grid_values.len() * 72 + 16);
    out.push_str("omega,gamma,I\n");
    for (i, &w) in ms.omegas.iter().enumerate() {
        for (j, &g) in ms.gammas.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", w, g, ms.grid_values[i * ms.gammas.len() + j])
                .expect("string write");
        }
    }
    std::fs::write(out_path, out)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", out_path.display())))?;
    eprintln!(
        "wrote a {} x {} indicator grid to {}",
        ms.omegas.len(),
        ms.gammas.len(),
        out_path.display()
    );
    Ok(())
}

/// `localize`: arrival curves and trilateration only.
pub fn localize_cmd(scenario_path: &Path) -> Result<(), CliError> {
    let (file, scenario) = load(scenario_path)?;
    let detectors = file.detector_positions(&scenario.domain);
    let config = file.sweep_config(None);
    let ms = synthesize_measurements(&scenario, &detectors, &config).map_err(validation)?;
    let fix = localize(&ms).map_err(pipeline)?;
    print_json(&fix)
}

/// `invert`: the full imaging pipeline. With `--traces`, the arrival curves
/// come from recorded trace files instead of direct synthesis; the sweep
/// grid is always synthesized on the volume route.
pub fn invert(
    scenario_path: &Path,
    traces_dir: Option<&Path>,
    gamma_fixed: Option<f64>,
) -> Result<(), CliError> {
    let (file, scenario) = load(scenario_path)?;
    let config = file.sweep_config(gamma_fixed);
    let ms = match traces_dir {
        None => {
            let detectors = file.detector_positions(&scenario.domain);
            synthesize_measurements(&scenario, &detectors, &config).map_err(validation)?
        }
        Some(dir) => measurements_from_traces(&scenario, &config, dir)?,
    };
    let report = run_pipeline(&ms).map_err(pipeline)?;
    print_json(&report)
}

/// Builds a measurement set whose arrival curves are read back from a
/// recorded trace directory.
fn measurements_from_traces(
    scenario: &Scenario,
    config: &plasmo_core::inversion::SweepConfig,
    dir: &Path,
) -> Result<MeasurementSet, CliError> {
    let manifest = read_manifest(dir).map_err(CliError::Validation)?;
    let detectors = manifest.detector_positions();
    let mut ms =
        synthesize_measurements(scenario, &detectors, config).map_err(validation)?;

    // The averaging radius cannot exceed the recording duration.
    let limit = manifest.t_max - 2.0 * manifest.dt;
    let keep = ms.s_grid.iter().take_while(|&&s| s <= limit).count();
    if keep < 8 {
        return Err(CliError::Validation(format!(
            "traces in {} are too short: they support {keep} arrival samples up to \
             t = {limit:.3e}",
            dir.display()
        )));
    }
    ms.s_grid.truncate(keep);

    let mut curves = Vec::with_capacity(detectors.len());
    for (k, detector) in detectors.iter().enumerate() {
        let background = read_trace_csv(&background_trace_path(dir, k), *detector, manifest.dt)
            .map_err(CliError::Validation)?;
        let with_particle = read_trace_csv(&particle_trace_path(dir, k), *detector, manifest.dt)
            .map_err(CliError::Validation)?;
        let mut curve = Vec::with_capacity(keep);
        for &s in &ms.s_grid {
            let p_bg = plasmo_core::acoustic::pstar_from_trace(&background, s)
                .map_err(validation)?;
            let p_full = plasmo_core::acoustic::pstar_from_trace(&with_particle, s)
                .map_err(validation)?;
            curve.push(indicator(p_full, p_bg));
        }
        curves.push(curve);
    }
    ms.curves = curves;
    ms.reference = (manifest.omega, manifest.gamma);
    ms.measurement_radius = *ms.s_grid.last().expect("non-empty by the length check");
    Ok(ms)
}
