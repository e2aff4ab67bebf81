//! Trace-directory layout: a `manifest.json` describing the recording plus
//! one pair of CSV files per detector.
//!
//! All floats are written with 17 significant digits, so every file is
//! byte-reproducible and round-trips exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use plasmo_core::acoustic::PressureTrace;

type Vec3 = Vector3<f64>;

/// Recording parameters stored next to the trace files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceManifest {
    pub omega: f64,
    pub gamma: f64,
    pub dt: f64,
    pub t_max: f64,
    pub detectors: Vec<[f64; 3]>,
}

impl TraceManifest {
    pub fn detector_positions(&self) -> Vec<Vec3> {
        self.detectors.iter().map(|p| Vec3::from(*p)).collect()
    }
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

pub fn background_trace_path(dir: &Path, detector: usize) -> PathBuf {
    dir.join(format!("trace_{detector}_background.csv"))
}

pub fn particle_trace_path(dir: &Path, detector: usize) -> PathBuf {
    dir.join(format!("trace_{detector}_particle.csv"))
}

pub fn write_manifest(dir: &Path, manifest: &TraceManifest) -> Result<(), String> {
    let path = manifest_path(dir);
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| format!("cannot encode manifest: {e}"))?;
    std::fs::write(&path, text + "\n")
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

pub fn read_manifest(dir: &Path) -> Result<TraceManifest, String> {
    let path = manifest_path(dir);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{} is not valid: {e}", path.display()))
}

pub fn write_trace_csv(path: &Path, trace: &PressureTrace) -> Result<(), String> {
    let mut out = String::with_capacity(trace.values.len() * 48 + 8);
    out.push_str("t,p\n");
    for (i, v) in trace.values.iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e}", i as f64 * trace.dt, v).expect("string write");
    }
    std::fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

pub fn read_trace_csv(path: &Path, detector: Vec3, dt: f64) -> Result<PressureTrace, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("t,p") => {}
        _ => return Err(format!("{}: expected a `t,p` header", path.display())),
    }
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let (_, p) = line
            .split_once(',')
            .ok_or_else(|| format!("{} row {}: expected two columns", path.display(), row + 1))?;
        let value: f64 = p
            .trim()
            .parse()
            .map_err(|e| format!("{} row {}: {e}", path.display(), row + 1))?;
        values.push(value);
    }
    PressureTrace::new(detector, dt, values).map_err(|e| format!("{}: {e}", path.display()))
}
