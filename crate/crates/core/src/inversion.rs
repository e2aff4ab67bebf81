//! The imaging procedure: localize the injected particle from arrival
//! times of the averaged-pressure difference, sweep the excitation over a
//! frequency–damping rectangle, detect indicator peaks, match them to the
//! visible eigenvalues by monotone order, and recover the background
//! permittivity at the injection site.
//!
//! The stages are pure and sequential; only dense grid/curve synthesis runs
//! in parallel.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acoustic::{initial_pressure, AcousticError};
use crate::dispersion::{
    bounds, lorentz_permittivity, resonance, DispersionError, HostPermittivity, LorentzMedium,
    SweepSquare,
};
use crate::emfield::{FieldError, Scenario, LAMBDA_DEGENERACY_TOL};
use crate::geometry::{BallDomain, Shape, Vec3};
use crate::spectral::{visible_modes, SpectralError};

/// Minimum relative prominence (against the grid maximum) for a local
/// maximum to count as a peak.
pub const PEAK_PROMINENCE_RATIO: f64 = 0.05;

/// Trilateration rejects sphere systems whose root-mean-square radius
/// mismatch exceeds this multiple of the size hint.
pub const SPHERE_RESIDUAL_FACTOR: f64 = 10.0;

/// Pre-arrival floors are clamped to this fraction of the plateau before
/// taking the geometric-mean threshold, so ideal zero floors stay usable.
pub const ARRIVAL_FLOOR_CLAMP: f64 = 1e-12;

/// The post-arrival plateau must exceed this multiple of the pre-arrival
/// floor for a curve to count as carrying a particle signature.
pub const ARRIVAL_RISE_FACTOR: f64 = 10.0;

/// Default host loss-ratio bound used to size the sweep rectangle.
pub const DEFAULT_LOSS_RATIO_BOUND: f64 = 0.2;

/// Relative safety margin added on top of hard arrival requirements when
/// choosing averaging radii.
pub const MEASUREMENT_MARGIN: f64 = 0.1;

/// Fewest samples an arrival curve may carry (floor/plateau windows need
/// room on both ends).
const MIN_CURVE_SAMPLES: usize = 8;

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum InversionError {
    #[error(
        "no particle signature: arrival search found floor {floor:.3e} and plateau \
         {plateau:.3e} with no clear rise"
    )]
    NoParticleSignature { floor: f64, plateau: f64 },
    #[error("arrival curve has {values} values for {samples} radius samples")]
    CurveMismatch { samples: usize, values: usize },
    #[error("arrival curve needs at least {min} samples, got {n}")]
    CurveTooShort { n: usize, min: usize },
    #[error("radius samples must increase strictly (violated at index {index})")]
    SampleGridNotIncreasing { index: usize },
    #[error(
        "arrival curve must be sampled finer than the size hint: step {max_step:.3e} \
         vs hint {a_hint:.3e}"
    )]
    SampleStepTooCoarse { max_step: f64, a_hint: f64 },
    #[error("arrival curve value at index {index} is not finite or negative: {value}")]
    BadCurveValue { index: usize, value: f64 },
    #[error("size hint must be positive and finite, got {a_hint}")]
    InvalidHint { a_hint: f64 },
    #[error(
        "trilateration degenerate: detectors are collinear (normalized spread \
         {spread:.3e}) and the sphere system leaves a mirror ambiguity"
    )]
    DegenerateDetectors { spread: f64 },
    #[error("sphere radius {index} is not a positive finite distance: {value}")]
    InvalidDistance { index: usize, value: f64 },
    #[error(
        "trilateration inconsistent: sphere residual {residual:.3e} exceeds the \
         allowance {bound:.3e}"
    )]
    InconsistentSpheres { residual: f64, bound: f64 },
    #[error("indicator grid is empty")]
    EmptyGrid,
    #[error("indicator grid {axis} axis must increase strictly (violated at index {index})")]
    GridAxisNotIncreasing { axis: &'static str, index: usize },
    #[error("indicator grid {axis} value {value} lies outside the open sweep rectangle")]
    GridOutsideSquare { axis: &'static str, value: f64 },
    #[error("indicator grid holds {got} values but the axes span {expected} cells")]
    GridSizeMismatch { expected: usize, got: usize },
    #[error("indicator value at flat index {index} is not finite or negative: {value}")]
    BadGridValue { index: usize, value: f64 },
    #[error("more peaks than visible modes ({peaks} > {modes})")]
    MorePeaksThanModes { peaks: usize, modes: usize },
    #[error(
        "eigenvalue matching underdetermined: {peaks} peaks for {modes} visible modes \
         and no host prior to rank the order-preserving injections"
    )]
    MatchingUnderdetermined { peaks: usize, modes: usize },
    #[error("visible eigenvalues must be strictly increasing (violated at index {index})")]
    EigenvaluesNotSorted { index: usize },
    #[error(
        "eigenvalue {lambda} outside (0, 1): the recovery formula -eps_p l/(1-l) needs a \
         visible-band eigenvalue"
    )]
    InvalidEigenvalue { lambda: f64 },
    #[error("no indicator peaks above the prominence threshold")]
    NoPeaks,
    #[error("localization needs at least 3 detectors, got {n}")]
    TooFewDetectors { n: usize },
    #[error("detector sits {offset:.3e} away from the chamber boundary")]
    DetectorOffBoundary { offset: f64 },
    #[error(
        "indicator recorded at radius {radius:.6} but the arrival estimate requires at \
         least {required:.6}"
    )]
    MeasurementTooEarly { radius: f64, required: f64 },
    #[error("fixed damping {gamma} lies outside the open sweep rectangle")]
    InvalidFixedDamping { gamma: f64 },
    #[error("sweep grid sizes must be positive, got {n_omega} x {n_gamma}")]
    InvalidGridSize { n_omega: usize, n_gamma: usize },
    #[error("radius step fraction must lie in (0, 1), got {value}")]
    InvalidStepFraction { value: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Acoustic(#[from] AcousticError),
}

// ---------------------------------------------------------------------------
// indicator grid
// ---------------------------------------------------------------------------

/// Dense record of the indicator `|p★ − p★₀|` over a frequency–damping
/// rectangle, from one boundary detector at one averaging radius.
///
/// Both axes increase strictly and sit strictly inside the open sweep
/// rectangle; values are finite and non-negative. Values are stored
/// row-major with frequency as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid {
    omegas: Vec<f64>,
    gammas: Vec<f64>,
    values: Vec<f64>,
}

impl IndicatorGrid {
    pub fn new(
        omegas: Vec<f64>,
        gammas: Vec<f64>,
        values: Vec<f64>,
        square: &SweepSquare,
    ) -> Result<Self, InversionError> {
        if omegas.is_empty() || gammas.is_empty() {
            return Err(InversionError::EmptyGrid);
        }
        check_axis(&omegas, "frequency", square.omega_min, square.omega_max)?;
        check_axis(&gammas, "damping", 0.0, square.gamma_max)?;
        let expected = omegas.len() * gammas.len();
        if values.len() != expected {
            return Err(InversionError::GridSizeMismatch { expected, got: values.len() });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(InversionError::BadGridValue { index, value });
            }
        }
        Ok(IndicatorGrid { omegas, gammas, values })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at frequency index `i` and damping index `j`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.gammas.len() + j]
    }
}

fn check_axis(
    axis_values: &[f64],
    axis: &'static str,
    lo: f64,
    hi: f64,
) -> Result<(), InversionError> {
    for (index, w) in axis_values.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(InversionError::GridAxisNotIncreasing { axis, index: index + 1 });
        }
    }
    for &value in axis_values {
        if !(value.is_finite() && value > lo && value < hi) {
            return Err(InversionError::GridOutsideSquare { axis, value });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// indicator and arrival estimation
// ---------------------------------------------------------------------------

/// Indicator value: absolute difference of the two averaged pressures at one
/// probe configuration.
pub fn indicator(pstar_with: f64, pstar_without: f64) -> f64 {
    (pstar_with - pstar_without).abs()
}

/// Distance to the particle from the first rise of the averaged-pressure
/// difference over the averaging radius.
///
/// The floor is the mean over the leading window, the plateau the mean over
/// the trailing window; the crossing of their geometric mean, linearly
/// interpolated between samples, is the arrival estimate. Finite propagation
/// speed makes this the distance to the particle's near surface, up to the
/// particle's own size.
pub fn estimate_distance(
    s_grid: &[f64],
    curve: &[f64],
    a_hint: f64,
) -> Result<f64, InversionError> {
    if !(a_hint.is_finite() && a_hint > 0.0) {
        return Err(InversionError::InvalidHint { a_hint });
    }
    if curve.len() != s_grid.len() {
        return Err(InversionError::CurveMismatch {
            samples: s_grid.len(),
            values: curve.len(),
        });
    }
    let n = curve.len();
    if n < MIN_CURVE_SAMPLES {
        return Err(InversionError::CurveTooShort { n, min: MIN_CURVE_SAMPLES });
    }
    let mut max_step: f64 = 0.0;
    for (index, w) in s_grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(InversionError::SampleGridNotIncreasing { index: index + 1 });
        }
        max_step = max_step.max(w[1] - w[0]);
    }
    if !(max_step < a_hint) {
        return Err(InversionError::SampleStepTooCoarse { max_step, a_hint });
    }
    for (index, &value) in curve.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(InversionError::BadCurveValue { index, value });
        }
    }

    let window = (n / 20).max(3);
    let floor = curve[..window].iter().sum::<f64>() / window as f64;
    let plateau = curve[n - window..].iter().sum::<f64>() / window as f64;
    if !(plateau > 0.0) || plateau <= ARRIVAL_RISE_FACTOR * floor {
        return Err(InversionError::NoParticleSignature { floor, plateau });
    }
    let threshold = (floor.max(ARRIVAL_FLOOR_CLAMP * plateau) * plateau).sqrt();

    let first = curve
        .iter()
        .position(|&v| v >= threshold)
        .expect("the trailing window mean exceeds the threshold");
    if first == 0 {
        return Ok(s_grid[0]);
    }
    let (s0, s1) = (s_grid[first - 1], s_grid[first]);
    let (v0, v1) = (curve[first - 1], curve[first]);
    let t = if v1 > v0 { (threshold - v0) / (v1 - v0) } else { 1.0 };
    Ok(s0 + t * (s1 - s0))
}

// ---------------------------------------------------------------------------
// trilateration
// ---------------------------------------------------------------------------

/// Intersection of three detector-centered spheres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trilateration {
    pub point: Vec3,
    /// Root-mean-square radius mismatch at the returned point.
    pub residual: f64,
}

/// Locates the particle center from three detector positions and the three
/// estimated distances.
///
/// The pairwise sphere differences give two planes whose intersection line
/// is normal to the detector plane; intersecting it with the first sphere
/// leaves a mirror-symmetric candidate pair. The mirror is resolved by
/// preferring the candidate inside the chamber, then the smaller radius
/// mismatch, then proximity to the chamber center.
pub fn trilaterate(
    domain: &BallDomain,
    points: &[Vec3; 3],
    dists: &[f64; 3],
    a_hint: f64,
) -> Result<Trilateration, InversionError> {
    if !(a_hint.is_finite() && a_hint > 0.0) {
        return Err(InversionError::InvalidHint { a_hint });
    }
    for (index, &value) in dists.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(InversionError::InvalidDistance { index, value });
        }
    }
    let a1 = points[1] - points[0];
    let a2 = points[2] - points[0];
    let normal = a1.cross(&a2);
    let scale = a1.norm() * a2.norm();
    let spread = if scale > 0.0 { normal.norm() / scale } else { 0.0 };
    if spread <= 1e-12 {
        return Err(InversionError::DegenerateDetectors { spread });
    }

    // Plane equations from subtracting |x - p_i|^2 = d_i^2 pairwise.
    let b = Vector2::new(
        0.5 * (dists[0] * dists[0] - dists[1] * dists[1] + points[1].norm_squared()
            - points[0].norm_squared()),
        0.5 * (dists[0] * dists[0] - dists[2] * dists[2] + points[2].norm_squared()
            - points[0].norm_squared()),
    );
    // Minimum-norm point of the two-plane system via its 2x2 Gram matrix.
    let gram = Matrix2::new(a1.dot(&a1), a1.dot(&a2), a1.dot(&a2), a2.dot(&a2));
    let y = gram
        .lu()
        .solve(&b)
        .ok_or(InversionError::DegenerateDetectors { spread })?;
    let on_line = a1 * y[0] + a2 * y[1];
    let axis = normal.normalize();

    // |on_line + t axis - p0|^2 = d0^2, a monic quadratic in t.
    let offset = on_line - points[0];
    let beta = axis.dot(&offset);
    let c = offset.norm_squared() - dists[0] * dists[0];
    let disc = beta * beta - c;
    let candidates: Vec<Vec3> = if disc >= 0.0 {
        let root = disc.sqrt();
        vec![on_line + axis * (-beta + root), on_line + axis * (-beta - root)]
    } else {
        // Slightly inconsistent spheres: fall back to the closest approach.
        vec![on_line + axis * (-beta)]
    };

    let residual_at = |x: &Vec3| -> f64 {
        let sq = points
            .iter()
            .zip(dists.iter())
            .map(|(p, d)| {
                let miss = (x - p).norm() - d;
                miss * miss
            })
            .sum::<f64>()
            / 3.0;
        sq.sqrt()
    };
    let best = candidates
        .iter()
        .copied()
        .min_by(|a, b| {
            let key_a = (!domain.contains(a), residual_at(a), (a - domain.center).norm());
            let key_b = (!domain.contains(b), residual_at(b), (b - domain.center).norm());
            key_a.partial_cmp(&key_b).expect("residuals and norms are finite")
        })
        .expect("at least one candidate");
    let residual = residual_at(&best);
    let bound = SPHERE_RESIDUAL_FACTOR * a_hint;
    if residual > bound {
        return Err(InversionError::InconsistentSpheres { residual, bound });
    }
    Ok(Trilateration { point: best, residual })
}

// ---------------------------------------------------------------------------
// peak detection and mode matching
// ---------------------------------------------------------------------------

/// One indicator peak. `omega` carries a one-step quadratic refinement
/// along the frequency axis; `gamma` and `value` are the grid sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub omega: f64,
    pub gamma: f64,
    pub value: f64,
    /// Height above the grid minimum.
    pub prominence: f64,
}

/// Strict local maxima of the indicator grid in the 8-neighborhood, with
/// prominence at least [`PEAK_PROMINENCE_RATIO`] of the grid maximum.
/// Edge cells compete only against their existing neighbors. Returned
/// sorted by ascending frequency, ties by ascending damping.
pub fn detect_peaks(grid: &IndicatorGrid) -> Result<Vec<Peak>, InversionError> {
    let (n_w, n_g) = (grid.omegas.len(), grid.gammas.len());
    if n_w == 0 || n_g == 0 {
        return Err(InversionError::EmptyGrid);
    }
    let max = grid.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = grid.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut peaks = Vec::new();
    for i in 0..n_w {
        for j in 0..n_g {
            let v = grid.value(i, j);
            let prominence = v - min;
            if prominence < PEAK_PROMINENCE_RATIO * max {
                continue;
            }
            let mut strict = true;
            'scan: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= n_w as i64 || nj >= n_g as i64 {
                        continue;
                    }
                    if grid.value(ni as usize, nj as usize) >= v {
                        strict = false;
                        break 'scan;
                    }
                }
            }
            if strict {
                peaks.push(Peak {
                    omega: refine_omega(grid, i, j),
                    gamma: grid.gammas[j],
                    value: v,
                    prominence,
                });
            }
        }
    }
    peaks.sort_by(|a, b| {
        (a.omega, a.gamma)
            .partial_cmp(&(b.omega, b.gamma))
            .expect("peak coordinates are finite")
    });
    Ok(peaks)
}

/// One quadratic-fit step along the frequency axis through the peak cell
/// and its row neighbors; falls back to the grid frequency at edges or
/// degenerate fits. The vertex is clamped to the neighbor interval.
fn refine_omega(grid: &IndicatorGrid, i: usize, j: usize) -> f64 {
    let n_w = grid.omegas.len();
    if i == 0 || i + 1 >= n_w {
        return grid.omegas[i];
    }
    let (xl, x0, xr) = (grid.omegas[i - 1], grid.omegas[i], grid.omegas[i + 1]);
    let (vl, v0, vr) = (grid.value(i - 1, j), grid.value(i, j), grid.value(i + 1, j));
    let dl = x0 - xl;
    let dr = xr - x0;
    let num = dl * dl * (v0 - vr) - dr * dr * (v0 - vl);
    let den = dl * (v0 - vr) + dr * (v0 - vl);
    if den.abs() <= f64::EPSILON * (v0.abs() + vl.abs() + vr.abs()) {
        return x0;
    }
    (x0 - 0.5 * num / den).clamp(xl, xr)
}

/// Pairs detected peaks with visible eigenvalues.
///
/// Equal counts pair in ascending order. Fewer peaks than eigenvalues are
/// assigned by the order-preserving injection minimizing the summed
/// frequency offset to the closed-form resonances, which needs a host
/// reference to evaluate them. More peaks than eigenvalues is an error.
pub fn match_eigenvalues(
    peaks: &[Peak],
    lambdas: &[f64],
    reference: Option<(&HostPermittivity, &LorentzMedium)>,
) -> Result<Vec<(Peak, f64)>, InversionError> {
    for (index, w) in lambdas.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(InversionError::EigenvaluesNotSorted { index: index + 1 });
        }
    }
    if peaks.len() > lambdas.len() {
        return Err(InversionError::MorePeaksThanModes {
            peaks: peaks.len(),
            modes: lambdas.len(),
        });
    }
    if peaks.len() == lambdas.len() {
        return Ok(peaks.iter().copied().zip(lambdas.iter().copied()).collect());
    }
    let (host, medium) = reference.ok_or(InversionError::MatchingUnderdetermined {
        peaks: peaks.len(),
        modes: lambdas.len(),
    })?;
    let resonant: Vec<f64> = lambdas
        .iter()
        .map(|&l| resonance(l, host, medium).map(|r| r.omega))
        .collect::<Result<_, _>>()?;
    let chosen = best_injection(peaks, &resonant)
        .expect("peaks.len() < lambdas.len() admits at least one injection");
    Ok(chosen
        .into_iter()
        .enumerate()
        .map(|(k, j)| (peaks[k], lambdas[j]))
        .collect())
}

/// Order-preserving injection of peak indices into mode indices minimizing
/// the summed |peak frequency − resonance|; first in lexicographic order on
/// ties.
fn best_injection(peaks: &[Peak], resonant: &[f64]) -> Option<Vec<usize>> {
    fn search(
        peaks: &[Peak],
        resonant: &[f64],
        k: usize,
        start: usize,
        cost: f64,
        current: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if k == peaks.len() {
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                *best = Some((cost, current.clone()));
            }
            return;
        }
        let remaining = peaks.len() - k;
        for j in start..=resonant.len() - remaining {
            current.push(j);
            search(
                peaks,
                resonant,
                k + 1,
                j + 1,
                cost + (peaks[k].omega - resonant[j]).abs(),
                current,
                best,
            );
            current.pop();
        }
    }
    let mut best = None;
    search(peaks, resonant, 0, 0, 0.0, &mut Vec::new(), &mut best);
    best.map(|(_, indices)| indices)
}

/// Background permittivity from a matched eigenvalue and the particle
/// permittivity at the peak: `-eps_p l / (1 - l)`.
pub fn recover_permittivity(
    lambda: f64,
    eps_p_at_peak: Complex64,
) -> Result<Complex64, InversionError> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda < 1.0) {
        return Err(InversionError::InvalidEigenvalue { lambda });
    }
    Ok(-eps_p_at_peak * (lambda / (1.0 - lambda)))
}

// ---------------------------------------------------------------------------
// measurement sets and the pipeline
// ---------------------------------------------------------------------------

/// Everything the inversion is allowed to see: chamber and contrast-agent
/// priors, detector records of the averaged-pressure difference against the
/// averaging radius at one reference sweep point, and the indicator grid
/// recorded at the first detector. The true particle position and the host
/// permittivity are deliberately absent.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    pub domain: BallDomain,
    /// Contrast-agent material (a known, manufactured quantity).
    pub medium: LorentzMedium,
    /// Normalized particle geometry prior.
    pub shape: Shape,
    /// Prior on the particle's largest physical semi-axis.
    pub a_hint: f64,
    pub detectors: Vec<Vec3>,
    /// Averaging radii for the arrival curves, sampled finer than `a_hint`.
    pub s_grid: Vec<f64>,
    /// Arrival curves `|p★ − p★₀|(s)`, one per detector, at `reference`.
    pub curves: Vec<Vec<f64>>,
    /// `(omega, gamma)` the arrival curves were recorded at.
    pub reference: (f64, f64),
    pub square: SweepSquare,
    pub omegas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Indicator samples at the first detector, row-major with frequency as
    /// the slow index.
    pub grid_values: Vec<f64>,
    /// Averaging radius the indicator grid was recorded at.
    pub measurement_radius: f64,
    /// Optional host guess, used only to rank eigenvalue injections when
    /// fewer peaks than visible modes are detected.
    pub host_prior: Option<Complex64>,
}

impl MeasurementSet {
    pub fn validate(&self) -> Result<(), InversionError> {
        if !(self.a_hint.is_finite() && self.a_hint > 0.0) {
            return Err(InversionError::InvalidHint { a_hint: self.a_hint });
        }
        if self.detectors.len() < 3 {
            return Err(InversionError::TooFewDetectors { n: self.detectors.len() });
        }
        if self.curves.len() != self.detectors.len() {
            return Err(InversionError::CurveMismatch {
                samples: self.detectors.len(),
                values: self.curves.len(),
            });
        }
        for curve in &self.curves {
            if curve.len() != self.s_grid.len() {
                return Err(InversionError::CurveMismatch {
                    samples: self.s_grid.len(),
                    values: curve.len(),
                });
            }
        }
        if !(self.measurement_radius.is_finite() && self.measurement_radius > 0.0) {
            return Err(InversionError::MeasurementTooEarly {
                radius: self.measurement_radius,
                required: 0.0,
            });
        }
        Ok(())
    }
}

/// Localization result: the trilaterated center and the per-detector
/// distance estimates that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub z_hat: Vec3,
    pub residual: f64,
    pub distances: [f64; 3],
}

/// Runs the arrival stage alone: distance estimates from the first three
/// detectors' curves, then trilateration. The arrival senses the particle's
/// near surface, so the size hint is added back to aim the spheres at its
/// center.
pub fn localize(ms: &MeasurementSet) -> Result<Localization, InversionError> {
    ms.validate()?;
    let mut distances = [0.0; 3];
    let mut radii = [0.0; 3];
    for k in 0..3 {
        let d = estimate_distance(&ms.s_grid, &ms.curves[k], ms.a_hint)?;
        distances[k] = d;
        radii[k] = d + ms.a_hint;
    }
    let points = [ms.detectors[0], ms.detectors[1], ms.detectors[2]];
    let fix = trilaterate(&ms.domain, &points, &radii, ms.a_hint)?;
    Ok(Localization { z_hat: fix.point, residual: fix.residual, distances })
}

/// Recovery at one matched peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakRecovery {
    pub omega_star: f64,
    pub gamma_star: f64,
    pub lambda_matched: f64,
    pub eps_p_at_peak: Complex64,
    pub eps0_recovered: Complex64,
    pub prominence: f64,
}

/// Full output of the imaging pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub z_hat: Vec3,
    pub localization_residual: f64,
    pub distance_estimates: [f64; 3],
    pub peaks: Vec<PeakRecovery>,
}

/// The complete imaging procedure on one measurement set: localize, check
/// the indicator was recorded past its arrival requirement, detect peaks,
/// match eigenvalues, and recover the background permittivity at each
/// matched peak.
pub fn run_pipeline(ms: &MeasurementSet) -> Result<RecoveryReport, InversionError> {
    let localization = localize(ms)?;

    // The averaged difference saturates only once the sphere swallows the
    // particle: distance estimate plus one diameter.
    let required = localization.distances[0] + 2.0 * ms.a_hint;
    if ms.measurement_radius < required {
        return Err(InversionError::MeasurementTooEarly {
            radius: ms.measurement_radius,
            required,
        });
    }

    let grid = IndicatorGrid::new(
        ms.omegas.clone(),
        ms.gammas.clone(),
        ms.grid_values.clone(),
        &ms.square,
    )?;
    let peaks = detect_peaks(&grid)?;
    if peaks.is_empty() {
        return Err(InversionError::NoPeaks);
    }

    let modes = visible_modes(&ms.shape)?;
    let mut lambdas: Vec<f64> = Vec::new();
    for mode in &modes {
        if lambdas
            .last()
            .is_none_or(|&l| (mode.lambda - l).abs() > LAMBDA_DEGENERACY_TOL)
        {
            lambdas.push(mode.lambda);
        }
    }

    let prior_host = match ms.host_prior {
        Some(value) => Some(HostPermittivity::new(value)?),
        None => None,
    };
    let reference = prior_host.as_ref().map(|h| (h, &ms.medium));
    let matched = match_eigenvalues(&peaks, &lambdas, reference)?;

    let mut recoveries = Vec::with_capacity(matched.len());
    for (peak, lambda) in matched {
        let eps_p = lorentz_permittivity(&ms.medium, peak.omega, peak.gamma)?;
        let eps0 = recover_permittivity(lambda, eps_p)?;
        recoveries.push(PeakRecovery {
            omega_star: peak.omega,
            gamma_star: peak.gamma,
            lambda_matched: lambda,
            eps_p_at_peak: eps_p,
            eps0_recovered: eps0,
            prominence: peak.prominence,
        });
    }
    Ok(RecoveryReport {
        z_hat: localization.z_hat,
        localization_residual: localization.residual,
        distance_estimates: localization.distances,
        peaks: recoveries,
    })
}

// ---------------------------------------------------------------------------
// synthetic measurement generation
// ---------------------------------------------------------------------------

/// Knobs for synthetic measurement generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Host loss-ratio bound sizing the sweep rectangle.
    pub loss_ratio_bound: f64,
    pub n_omega: usize,
    pub n_gamma: usize,
    /// Single-row sweep at this damping (the lossless-host mode where the
    /// excitation damping is held fixed and small).
    pub gamma_fixed: Option<f64>,
    /// Arrival-curve radius step as a fraction of the particle scale.
    pub s_step_fraction: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            loss_ratio_bound: DEFAULT_LOSS_RATIO_BOUND,
            n_omega: 200,
            n_gamma: 50,
            gamma_fixed: None,
            s_step_fraction: 0.25,
        }
    }
}

/// Synthesizes the measurement set a laboratory sweep would record for a
/// scenario: arrival curves at the sweep rectangle's midpoint and the
/// indicator grid at the first detector, all on the direct volume route.
///
/// The smooth background integral is identical with and without the
/// particle, so it cancels exactly in every difference; only the particle's
/// absorbed-energy mass and the displaced-background mass contribute, which
/// keeps the synthesis closed-form per sample.
pub fn synthesize_measurements(
    scenario: &Scenario,
    detectors: &[Vec3],
    config: &SweepConfig,
) -> Result<MeasurementSet, InversionError> {
    if detectors.len() < 3 {
        return Err(InversionError::TooFewDetectors { n: detectors.len() });
    }
    for x in detectors {
        let offset = ((x - scenario.domain.center).norm() - scenario.domain.radius).abs();
        if offset > 1e-9 * scenario.domain.radius.max(1.0) {
            return Err(InversionError::DetectorOffBoundary { offset });
        }
    }
    if config.n_omega == 0 || (config.n_gamma == 0 && config.gamma_fixed.is_none()) {
        return Err(InversionError::InvalidGridSize {
            n_omega: config.n_omega,
            n_gamma: config.n_gamma,
        });
    }
    if !(config.s_step_fraction > 0.0 && config.s_step_fraction < 1.0) {
        return Err(InversionError::InvalidStepFraction { value: config.s_step_fraction });
    }

    let square = bounds(config.loss_ratio_bound, &scenario.medium)?;
    let omegas: Vec<f64> = (0..config.n_omega)
        .map(|i| {
            square.omega_min
                + (i + 1) as f64 * (square.omega_max - square.omega_min)
                    / (config.n_omega + 1) as f64
        })
        .collect();
    let gammas: Vec<f64> = match config.gamma_fixed {
        Some(g) => {
            if !(g.is_finite() && g > 0.0 && g < square.gamma_max) {
                return Err(InversionError::InvalidFixedDamping { gamma: g });
            }
            vec![g]
        }
        None => (0..config.n_gamma)
            .map(|j| (j + 1) as f64 * square.gamma_max / (config.n_gamma + 1) as f64)
            .collect(),
    };

    let omega_ref =
        ((square.omega_min * square.omega_min + square.omega_max * square.omega_max) / 2.0).sqrt();
    let gamma_ref = config.gamma_fixed.unwrap_or(square.gamma_max / 2.0);

    let z = scenario.particle.center;
    let diameter = scenario.particle.diameter();
    let a_hint = diameter / 2.0;
    let max_dist = detectors
        .iter()
        .map(|x| (x - z).norm())
        .fold(f64::NEG_INFINITY, f64::max);

    let step = config.s_step_fraction * scenario.particle_scale();
    let s_max = (max_dist + diameter) * (1.0 + 2.0 * MEASUREMENT_MARGIN);
    let n_s = (s_max / step).ceil() as usize;
    let s_grid: Vec<f64> = (0..n_s).map(|i| (i + 1) as f64 * step).collect();

    let reference_state = initial_pressure(scenario, omega_ref, gamma_ref, true)?;
    let curves: Vec<Vec<f64>> = detectors
        .par_iter()
        .map(|x| {
            s_grid
                .iter()
                .map(|&s| {
                    let sum: f64 = reference_state
                        .sources
                        .iter()
                        .map(|src| src.mass * src.ramp_fraction(x, s))
                        .sum();
                    sum.abs() / (4.0 * std::f64::consts::PI)
                })
                .collect()
        })
        .collect();

    let measurement_radius =
        ((detectors[0] - z).norm() + diameter) * (1.0 + MEASUREMENT_MARGIN);
    let grid_values: Vec<f64> = omegas
        .par_iter()
        .map(|&omega| {
            gammas
                .iter()
                .map(|&gamma| {
                    let state = initial_pressure(scenario, omega, gamma, true)?;
                    let sum: f64 = state
                        .sources
                        .iter()
                        .map(|src| src.mass * src.ramp_fraction(&detectors[0], measurement_radius))
                        .sum();
                    Ok(sum.abs() / (4.0 * std::f64::consts::PI))
                })
                .collect::<Result<Vec<f64>, InversionError>>()
        })
        .collect::<Result<Vec<Vec<f64>>, InversionError>>()?
        .into_iter()
        .flatten()
        .collect();

    Ok(MeasurementSet {
        domain: scenario.domain,
        medium: scenario.medium,
        shape: scenario.particle.shape,
        a_hint,
        detectors: detectors.to_vec(),
        s_grid,
        curves,
        reference: (omega_ref, gamma_ref),
        square,
        omegas,
        gammas,
        grid_values,
        measurement_radius,
        host_prior: None,
    })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
