//! Acoustic forward model: initial pressure, time-domain boundary pressure,
//! and the doubly time-averaged observable `p★`.
//!
//! In normalized units (unit sound speed, unit thermo-acoustic efficiency)
//! an absorption density `f(y) = |Im ε|(y) |E|²(y) χ_Ω(y)` launches the
//! pressure wave
//!
//! `p(x, t) = (1/4π) ∂_t [ J(t) / t ]`,   `J(t) = ∫_{∂B(x,t)} f dσ`,
//!
//! and the averaged observable
//!
//! `p★(x, s) = ∫₀ˢ r ∫₀ʳ p(x, t) dt dr = (1/4π) ∫_{B(x,s)} f dy`
//!
//! admits two independent evaluation routes: double time integration of a
//! recorded trace, and direct volume integration of the source. Both are
//! implemented here and cross-checked in the tests.
//!
//! The particle's contribution is carried as a point-like uniform ball
//! source: an exact N-wave in the time domain, and a linear ramp of its
//! integrated mass in the volume domain. Background surface integrals
//! resolve the chamber indicator exactly as a polar cap, so the quadrature
//! only ever sees smooth integrands.

use rayon::prelude::*;
use thiserror::Error;

use crate::dispersion::DispersionError;
use crate::emfield::{electric_energy, particle_permittivity, FieldError, Scenario};
use crate::geometry::{
    gauss_legendre_on, sphere_band_quadrature, BallDomain, GeometryError, Vec3,
};

/// Fraction of the trace step used as the half-width of the centered time
/// difference inside [`pressure_at`].
const TIME_DERIVATIVE_SUBSTEP: f64 = 0.1;

/// Errors raised by the acoustic forward model.
#[derive(Debug, Error)]
pub enum AcousticError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("trace duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("time must be non-negative and finite, got {0}")]
    InvalidTime(f64),
    #[error("averaging radius must be positive and finite, got {0}")]
    InvalidAveragingRadius(f64),
    #[error("point source must have positive finite radius, got {0}")]
    InvalidSourceRadius(f64),
    #[error("point source mass must be finite, got {0}")]
    NonFiniteSourceMass(f64),
    #[error("a pressure trace needs at least two samples, got {0}")]
    TraceTooShort(usize),
    #[error("trace sample {index} is not finite")]
    NonFiniteTraceValue { index: usize },
    #[error("averaging radius {s} exceeds the trace duration {t_max}")]
    BeyondTraceDuration { s: f64, t_max: f64 },
    #[error("evaluation point sits inside point source {index}")]
    DetectorInsideSource { index: usize },
    #[error("detector must sit on the chamber boundary (offset {offset:e})")]
    DetectorOffBoundary { offset: f64 },
    #[error(
        "averaging radius {s} is below the arrival threshold {required}; \
         the closed-form difference only holds past it"
    )]
    BelowArrivalThreshold { s: f64, required: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

/// A uniform-density ball source of integrated mass `mass` (signed: negative
/// masses track displaced background, not physical absorption).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource {
    pub center: Vec3,
    pub radius: f64,
    pub mass: f64,
}

impl PointSource {
    pub fn new(center: Vec3, radius: f64, mass: f64) -> Result<Self, AcousticError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(AcousticError::InvalidSourceRadius(radius));
        }
        if !mass.is_finite() {
            return Err(AcousticError::NonFiniteSourceMass(mass));
        }
        Ok(Self { center, radius, mass })
    }

    /// Uniform density inside the source ball.
    pub fn density(&self) -> f64 {
        self.mass / (4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3))
    }

    /// N-wave pressure at distance `r = |x − center|` and time `t`: the wave
    /// from a uniform ball is `ρ (r − t) / (2r)` on `[r − radius, r + radius]`
    /// and zero elsewhere.
    fn pressure(&self, r: f64, t: f64) -> f64 {
        if t < r - self.radius || t > r + self.radius {
            0.0
        } else {
            self.density() * (r - t) / (2.0 * r)
        }
    }

    /// Fraction of the source mass inside `B(x, s)` under the linear ramp
    /// model: zero up to `dist(x, source)`, one past `dist + 2·radius`,
    /// linear between.
    pub fn ramp_fraction(&self, x: &Vec3, s: f64) -> f64 {
        let dist = ((x - self.center).norm() - self.radius).max(0.0);
        ((s - dist) / (2.0 * self.radius)).clamp(0.0, 1.0)
    }

    /// Exact fraction of the source ball's volume inside `B(x, s)` (sphere–
    /// sphere lens). Sharper than the ramp model; used as a test oracle.
    pub fn lens_fraction(&self, x: &Vec3, s: f64) -> f64 {
        let r0 = self.radius;
        let d = (x - self.center).norm();
        if s <= d - r0 {
            return 0.0;
        }
        if s >= d + r0 {
            return 1.0;
        }
        let lens = std::f64::consts::PI
            * (r0 + s - d).powi(2)
            * (d * d + 2.0 * d * s - 3.0 * s * s + 2.0 * d * r0 + 6.0 * s * r0 - 3.0 * r0 * r0)
            / (12.0 * d);
        lens / (4.0 / 3.0 * std::f64::consts::PI * r0.powi(3))
    }
}

/// A smooth absorption density sampled pointwise, shared across threads by
/// the integration routines.
pub type AbsorptionDensity = Box<dyn Fn(&Vec3) -> f64 + Send + Sync>;

/// The initial acoustic state: a smooth absorption density on the chamber
/// (possibly absent) plus a set of compact ball sources.
///
/// Built directly for synthetic studies, or from a [`Scenario`] via
/// [`initial_pressure`], where the sources are the particle's absorbed
/// energy (non-negative mass) and the background it displaces (non-positive
/// mass).
pub struct InitialPressure {
    pub domain: BallDomain,
    background: Option<AbsorptionDensity>,
    pub sources: Vec<PointSource>,
}

impl InitialPressure {
    pub fn new(
        domain: BallDomain,
        background: Option<AbsorptionDensity>,
        sources: Vec<PointSource>,
    ) -> Self {
        Self { domain, background, sources }
    }

    /// Background absorption density at `y` (zero when absent; the chamber
    /// indicator is applied by the integration routines, not here).
    pub fn background_at(&self, y: &Vec3) -> f64 {
        match &self.background {
            Some(f) => f(y),
            None => 0.0,
        }
    }

    fn has_background(&self) -> bool {
        self.background.is_some()
    }

    /// Surface integral `J(t) = ∫_{∂B(x,t) ∩ Ω} background dσ`, with the
    /// chamber intersection resolved exactly as a polar cap.
    fn cap_integral(&self, x: &Vec3, t: f64, order: usize) -> Result<f64, AcousticError> {
        if t <= 0.0 || !self.has_background() {
            return Ok(0.0);
        }
        let to_center = self.domain.center - x;
        let rho = to_center.norm();
        let r0 = self.domain.radius;
        let f = |y: &Vec3| self.background_at(y);
        if rho < 1e-14 * r0.max(1.0) {
            // Evaluation point at the chamber center: the sphere is either
            // fully inside or fully outside.
            if t <= r0 {
                return Ok(sphere_band_quadrature(x, t, &Vec3::z(), -1.0, 1.0, f, order)?);
            }
            return Ok(0.0);
        }
        let mu_lo = (t * t + rho * rho - r0 * r0) / (2.0 * t * rho);
        if mu_lo >= 1.0 {
            return Ok(0.0);
        }
        let axis = to_center / rho;
        let lo = mu_lo.max(-1.0);
        Ok(sphere_band_quadrature(x, t, &axis, lo, 1.0, f, order)?)
    }

    /// `J(t)/t`, extended by continuity to zero at `t = 0`.
    fn scaled_shell(&self, x: &Vec3, t: f64, order: usize) -> Result<f64, AcousticError> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.cap_integral(x, t, order)? / t)
    }
}

/// A uniformly sampled boundary pressure record starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureTrace {
    pub detector: Vec3,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl PressureTrace {
    pub fn new(detector: Vec3, dt: f64, values: Vec<f64>) -> Result<Self, AcousticError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(AcousticError::InvalidTimeStep(dt));
        }
        if values.len() < 2 {
            return Err(AcousticError::TraceTooShort(values.len()));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(AcousticError::NonFiniteTraceValue { index });
        }
        Ok(Self { detector, dt, values })
    }

    /// Last sample time.
    pub fn t_max(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    /// Sample times.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.dt)
    }
}

/// Pressure at point `x` and time `t`.
///
/// The background contributes through the spherical-means representation,
/// differentiated by a centered difference of half-width
/// `time_step / 10`; each ball source contributes its exact N-wave. At
/// `t = 0` the initial condition itself is returned.
pub fn pressure_at(
    ip: &InitialPressure,
    x: &Vec3,
    t: f64,
    time_step: f64,
    order: usize,
) -> Result<f64, AcousticError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(AcousticError::InvalidTime(t));
    }
    if !(time_step.is_finite() && time_step > 0.0) {
        return Err(AcousticError::InvalidTimeStep(time_step));
    }
    let mut source_part = 0.0;
    for (index, source) in ip.sources.iter().enumerate() {
        let r = (x - source.center).norm();
        if r <= source.radius {
            return Err(AcousticError::DetectorInsideSource { index });
        }
        source_part += source.pressure(r, t);
    }
    if t == 0.0 {
        let bg = if ip.domain.contains(x) { ip.background_at(x) } else { 0.0 };
        return Ok(bg + source_part);
    }
    if !ip.has_background() {
        return Ok(source_part);
    }
    let delta = time_step * TIME_DERIVATIVE_SUBSTEP;
    let t_lo = (t - delta).max(0.0);
    let t_hi = t + delta;
    let g_lo = ip.scaled_shell(x, t_lo, order)?;
    let g_hi = ip.scaled_shell(x, t_hi, order)?;
    let background_part = (g_hi - g_lo) / (t_hi - t_lo) / (4.0 * std::f64::consts::PI);
    Ok(background_part + source_part)
}

/// `p★(x, s)` by composite-trapezoid double integration of a recorded
/// trace; the final partial cell is handled by linear interpolation.
pub fn pstar_from_trace(trace: &PressureTrace, s: f64) -> Result<f64, AcousticError> {
    if !(s.is_finite() && s > 0.0) {
        return Err(AcousticError::InvalidAveragingRadius(s));
    }
    let t_max = trace.t_max();
    if s > t_max * (1.0 + 1e-12) {
        return Err(AcousticError::BeyondTraceDuration { s, t_max });
    }
    let s = s.min(t_max);
    let dt = trace.dt;
    let v = &trace.values;
    let full_cells = ((s / dt).floor() as usize).min(v.len() - 1);
    let mut inner = 0.0; // ∫₀^t p dτ at the current sample
    let mut outer = 0.0; // ∫₀^t r · inner(r) dr
    for k in 1..=full_cells {
        let t_prev = (k - 1) as f64 * dt;
        let t_curr = k as f64 * dt;
        let inner_prev = inner;
        inner += 0.5 * (v[k - 1] + v[k]) * dt;
        outer += 0.5 * (t_prev * inner_prev + t_curr * inner) * dt;
    }
    let t_k = full_cells as f64 * dt;
    let remainder = s - t_k;
    if remainder > 0.0 && full_cells + 1 < v.len() {
        let frac = remainder / dt;
        let v_s = v[full_cells] * (1.0 - frac) + v[full_cells + 1] * frac;
        let inner_s = inner + 0.5 * (v[full_cells] + v_s) * remainder;
        outer += 0.5 * (t_k * inner + s * inner_s) * remainder;
    }
    Ok(outer)
}

/// `p★(x, s)` by direct volume integration: smooth background over
/// `B(x,s) ∩ Ω` (radial Gauss–Legendre over exact polar-cap shell
/// integrals, split at the cap-onset radius), plus each source's linear
/// ramp mass.
pub fn pstar_volume(
    ip: &InitialPressure,
    x: &Vec3,
    s: f64,
    order: usize,
) -> Result<f64, AcousticError> {
    if !(s.is_finite() && s > 0.0) {
        return Err(AcousticError::InvalidAveragingRadius(s));
    }
    let mut total = 0.0;
    if ip.has_background() {
        let rho = (ip.domain.center - x).norm();
        let r0 = ip.domain.radius;
        let end = s.min(rho + r0);
        let onset = (r0 - rho).abs();
        let mut segments: Vec<(f64, f64)> = Vec::new();
        if rho <= r0 {
            // Interior (or boundary) point: full shells out to the onset
            // radius, polar caps beyond it.
            segments.push((0.0, end.min(onset)));
            if end > onset {
                segments.push((onset, end));
            }
        } else if end > onset {
            // Exterior point: nothing before first contact.
            segments.push((onset, end));
        }
        for (lo, hi) in segments {
            if hi <= lo {
                continue;
            }
            let (nodes, weights) = gauss_legendre_on(order, lo, hi);
            for (r, w) in nodes.iter().zip(weights.iter()) {
                total += w * ip.cap_integral(x, *r, order)?;
            }
        }
        total /= 4.0 * std::f64::consts::PI;
    }
    for source in &ip.sources {
        total += source.mass * source.ramp_fraction(x, s) / (4.0 * std::f64::consts::PI);
    }
    Ok(total)
}

/// Closed-form leading term of the averaged-pressure difference
/// `p★ − p★₀` past the particle's arrival window:
/// `|Im ε_p(ω, γ)| · ∫_D |u|² / 4π`, independent of the detector and of
/// `s` once `s ≥ dist(x, D) + diam(D)`.
pub fn pstar_difference_closed(
    scenario: &Scenario,
    omega: f64,
    gamma: f64,
    x: &Vec3,
    s: f64,
) -> Result<f64, AcousticError> {
    let required = scenario.particle.distance_from(x) + scenario.particle.diameter();
    if s < required {
        return Err(AcousticError::BelowArrivalThreshold { s, required });
    }
    let eps_p = particle_permittivity(scenario, omega, gamma)?;
    let energy = electric_energy(scenario, omega, gamma)?;
    Ok(eps_p.im.abs() * energy / (4.0 * std::f64::consts::PI))
}

/// Builds the initial acoustic state of a scenario at `(omega, gamma)`.
///
/// The background density is `Im ε₀ · |u₀(y)|²` (omitted entirely for
/// lossless hosts). With `with_particle`, two ball sources of the particle's
/// radius are added at its center: the absorbed energy
/// `|Im ε_p| · ∫_D |u|² ≥ 0`, and the displaced background
/// `−Im ε₀ · |u₀(z)|² · vol(D) ≤ 0`.
pub fn initial_pressure(
    scenario: &Scenario,
    omega: f64,
    gamma: f64,
    with_particle: bool,
) -> Result<InitialPressure, AcousticError> {
    let im0 = scenario.host.value().im;
    let background: Option<AbsorptionDensity> = if im0 > 0.0 {
        let sc = scenario.clone();
        Some(Box::new(move |y: &Vec3| im0 * sc.incident_intensity(y, omega)))
    } else {
        None
    };
    let mut sources = Vec::new();
    if with_particle {
        let particle = &scenario.particle;
        let radius = particle.diameter() / 2.0;
        let mass = particle_permittivity(scenario, omega, gamma)?.im.abs()
            * electric_energy(scenario, omega, gamma)?;
        sources.push(PointSource::new(particle.center, radius, mass)?);
        if im0 > 0.0 {
            let volume = 4.0 / 3.0
                * std::f64::consts::PI
                * particle.scale.powi(3)
                * particle.shape.axis_product();
            let displaced =
                -im0 * scenario.incident_intensity(&particle.center, omega) * volume;
            sources.push(PointSource::new(particle.center, radius, displaced)?);
        }
    }
    Ok(InitialPressure::new(scenario.domain, background, sources))
}

/// A background-only trace and its with-particle counterpart at one
/// detector.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePair {
    pub background: PressureTrace,
    pub with_particle: PressureTrace,
}

/// Synthesizes boundary pressure traces at `(omega, gamma)` for each
/// detector: one background-only record and one with the particle's N-wave
/// and displaced-background correction added. Detectors must sit on the
/// chamber boundary. Per-detector work runs in parallel.
pub fn synthesize_traces(
    scenario: &Scenario,
    detectors: &[Vec3],
    omega: f64,
    gamma: f64,
    dt: f64,
    t_max: f64,
    order: usize,
) -> Result<Vec<TracePair>, AcousticError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(AcousticError::InvalidTimeStep(dt));
    }
    if !(t_max.is_finite() && t_max > dt) {
        return Err(AcousticError::InvalidDuration(t_max));
    }
    for x in detectors {
        let offset = ((x - scenario.domain.center).norm() - scenario.domain.radius).abs();
        if offset > 1e-9 * scenario.domain.radius.max(1.0) {
            return Err(AcousticError::DetectorOffBoundary { offset });
        }
    }
    let bg_state = initial_pressure(scenario, omega, gamma, false)?;
    let full_state = initial_pressure(scenario, omega, gamma, true)?;
    let n = (t_max / dt).floor() as usize + 1;
    detectors
        .par_iter()
        .map(|x| {
            let mut bg_values = Vec::with_capacity(n);
            let mut full_values = Vec::with_capacity(n);
            for i in 0..n {
                let t = i as f64 * dt;
                let bg = pressure_at(&bg_state, x, t, dt, order)?;
                // The states share the background; only the compact sources
                // differ, and those are analytic.
                let mut sources = 0.0;
                for (index, source) in full_state.sources.iter().enumerate() {
                    let r = (x - source.center).norm();
                    if r <= source.radius {
                        return Err(AcousticError::DetectorInsideSource { index });
                    }
                    sources += source.pressure(r, t);
                }
                bg_values.push(bg);
                full_values.push(bg + sources);
            }
            Ok(TracePair {
                background: PressureTrace::new(*x, dt, bg_values)?,
                with_particle: PressureTrace::new(*x, dt, full_values)?,
            })
        })
        .collect()
}
