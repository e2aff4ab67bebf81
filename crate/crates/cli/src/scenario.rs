//! On-disk experiment description and its conversion into library types.
//!
//! A scenario file is a single JSON document holding the chamber, the host
//! and contrast-agent materials, the particle, the illumination, and
//! optional sweep and detector settings. Everything numeric has a sensible
//! default except the physical core (domain, host, medium, particle,
//! incident wave).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use plasmo_core::dispersion::{HostPermittivity, LorentzMedium};
use plasmo_core::emfield::{IncidentWave, Scenario};
use plasmo_core::geometry::{BallDomain, Particle, Shape};
use plasmo_core::inversion::SweepConfig;

type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HostSpec {
    pub eps0_real: f64,
    #[serde(default)]
    pub eps0_imag: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MediumSpec {
    pub eps_inf: f64,
    pub omega_p: f64,
    pub omega_0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticleSpec {
    /// `"ball"` or `"ellipsoid"` (the latter requires `semi_axes`).
    pub shape: String,
    #[serde(default)]
    pub semi_axes: Option<[f64; 3]>,
    pub center: [f64; 3],
    /// Largest physical semi-axis.
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IncidentSpec {
    pub direction: [f64; 3],
    pub polarization: [f64; 3],
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    1.0
}

/// Sweep settings; every field falls back to the library default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub loss_ratio_bound: f64,
    pub n_omega: usize,
    pub n_gamma: usize,
    pub gamma_fixed: Option<f64>,
    pub s_step_fraction: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let config = SweepConfig::default();
        SweepSpec {
            loss_ratio_bound: config.loss_ratio_bound,
            n_omega: config.n_omega,
            n_gamma: config.n_gamma,
            gamma_fixed: config.gamma_fixed,
            s_step_fraction: config.s_step_fraction,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub domain: DomainSpec,
    pub host: HostSpec,
    #[serde(default = "default_permeability")]
    pub permeability: f64,
    pub medium: MediumSpec,
    pub particle: ParticleSpec,
    pub incident: IncidentSpec,
    /// Exponent coupling the excitation detuning to the particle size.
    #[serde(default = "default_coupling_exponent")]
    pub coupling_exponent: f64,
    #[serde(default)]
    pub sweep: SweepSpec,
    /// Boundary detector positions; when absent, three detectors on a
    /// 45-degree polar cap are used.
    #[serde(default)]
    pub detectors: Option<Vec<[f64; 3]>>,
}

fn default_permeability() -> f64 {
    1.0
}

fn default_coupling_exponent() -> f64 {
    0.5
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read scenario {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("scenario {} is not valid: {e}", path.display()))
    }

    pub fn to_scenario(&self) -> Result<Scenario, String> {
        let shape = match self.particle.shape.as_str() {
            "ball" => {
                if self.particle.semi_axes.is_some() {
                    return Err("particle: a ball takes no semi_axes".into());
                }
                Shape::Ball
            }
            "ellipsoid" => {
                let axes = self
                    .particle
                    .semi_axes
                    .ok_or("particle: an ellipsoid requires semi_axes")?;
                Shape::ellipsoid(axes[0], axes[1], axes[2])
                    .map_err(|e| format!("particle: {e}"))?
            }
            other => return Err(format!("particle: unknown shape {other:?}")),
        };
        let domain = BallDomain {
            center: Vec3::from(self.domain.center),
            radius: self.domain.radius,
        };
        let host =
            HostPermittivity::new(Complex64::new(self.host.eps0_real, self.host.eps0_imag))
                .map_err(|e| format!("host: {e}"))?;
        let medium =
            LorentzMedium::new(self.medium.eps_inf, self.medium.omega_p, self.medium.omega_0)
                .map_err(|e| format!("medium: {e}"))?;
        let particle = Particle {
            shape,
            center: Vec3::from(self.particle.center),
            scale: self.particle.scale,
        };
        let incident = IncidentWave::new(
            Vec3::from(self.incident.direction),
            Vec3::from(self.incident.polarization),
            self.incident.amplitude,
        )
        .map_err(|e| format!("incident: {e}"))?;
        Scenario::new(
            domain,
            host,
            self.permeability,
            medium,
            particle,
            incident,
            self.coupling_exponent,
        )
        .map_err(|e| format!("scenario: {e}"))
    }

    pub fn sweep_config(&self, gamma_fixed_override: Option<f64>) -> SweepConfig {
        SweepConfig {
            loss_ratio_bound: self.sweep.loss_ratio_bound,
            n_omega: self.sweep.n_omega,
            n_gamma: self.sweep.n_gamma,
            gamma_fixed: gamma_fixed_override.or(self.sweep.gamma_fixed),
            s_step_fraction: self.sweep.s_step_fraction,
        }
    }

    pub fn detector_positions(&self, domain: &BallDomain) -> Vec<Vec3> {
        match &self.detectors {
            Some(list) => list.iter().map(|p| Vec3::from(*p)).collect(),
            None => default_detectors(domain),
        }
    }
}

/// Three boundary detectors on a 45-degree polar cap, 120 degrees apart in
/// azimuth: well spread for trilateration, and for particles away from the
/// far boundary the mirror image across the detector plane lands outside
/// the chamber, so the trilateration branch is unambiguous.
pub fn default_detectors(domain: &BallDomain) -> Vec<Vec3> {
    [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]
        .iter()
        .map(|&phi| {
            domain.center
                + domain.radius
                    * Vec3::new(
                        FRAC_1_SQRT_2 * phi.cos(),
                        FRAC_1_SQRT_2 * phi.sin(),
                        FRAC_1_SQRT_2,
                    )
        })
        .collect()
}
