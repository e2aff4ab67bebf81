//! Dispersion relation of a plasmonic inclusion in a dielectric host.
//!
//! A mode with eigenvalue `lambda` resonates where
//! `f(omega, gamma) = eps0 - (eps0 - eps_p(omega, gamma)) * lambda`
//! vanishes, with `eps_p` the Lorentz permittivity of the particle and
//! `eps0` the (complex, lossy) host value at the particle location. For the
//! Lorentz model the root has a closed form: writing
//! `A = eps0 (1 - lambda) + lambda eps_inf`,
//!
//! ```text
//! omega_n^2 = omega_0^2 + lambda eps_inf omega_p^2 Re(A) / |A|^2
//! gamma_n   = lambda eps_inf omega_p^2 Im(eps0) (1 - lambda) / (|A|^2 omega_n)
//! ```
//!
//! both exact roots of `f`, with `omega_n` inside the plasmonic band
//! `(omega_0, sqrt(omega_0^2 + omega_p^2))` and `gamma_n` below
//! `omega_max * sup |Im eps0 / Re eps0|`. `omega_n` is strictly increasing
//! in `lambda`, which is what makes peak-to-eigenvalue matching well posed.

use num_complex::Complex64;
use thiserror::Error;

/// Half-width of the excluded zone around the eigenvalue accumulation point
/// 1/2, where the root's conditioning degrades.
pub const LAMBDA_GUARD: f64 = 0.02;

/// Floor applied to the damping bound so the sweep square never collapses.
pub const GAMMA_FLOOR_FRACTION: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum DispersionError {
    #[error("medium parameter {name} must be positive and finite, got {value}")]
    InvalidMedium { name: &'static str, value: f64 },
    #[error("host permittivity must have non-negative imaginary part, got {im}")]
    LossyGainHost { im: f64 },
    #[error("host permittivity must be finite")]
    NonFiniteHost,
    #[error("frequency must be positive, got {omega}")]
    NonPositiveFrequency { omega: f64 },
    #[error("damping must be non-negative, got {gamma}")]
    NegativeDamping { gamma: f64 },
    #[error("undamped Lorentz pole at omega = omega_0 = {omega_0}")]
    UndampedPole { omega_0: f64 },
    #[error("Drude pole at omega = 0")]
    DrudePole,
    #[error("eigenvalue {lambda} outside (0, 1)")]
    LambdaOutOfRange { lambda: f64 },
    #[error("eigenvalue {lambda} inside the guard zone |lambda - 1/2| <= {LAMBDA_GUARD}")]
    LambdaNearHalf { lambda: f64 },
    #[error("host real part {re} must exceed eps_inf = {eps_inf}")]
    HostBelowEpsInf { re: f64, eps_inf: f64 },
    #[error("plasmonic band collapsed: omega_p = {omega_p} is negligible against omega_0 = {omega_0}")]
    BandCollapsed { omega_p: f64, omega_0: f64 },
    #[error("loss-ratio bound must be non-negative and finite, got {bound}")]
    InvalidBound { bound: f64 },
    #[error("detuning parameters need 0 < a < 1 and 0 < h < 1, got a = {a}, h = {h}")]
    InvalidDetuning { a: f64, h: f64 },
    #[error("detuning {detuning} exceeds omega_n^2 = {omega_sq}")]
    DetuningTooLarge { detuning: f64, omega_sq: f64 },
    #[error("bisection found no sign change in the band")]
    BisectionFailed,
}

/// Lorentz oscillator parameters of the particle material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzMedium {
    pub eps_inf: f64,
    pub omega_p: f64,
    pub omega_0: f64,
}

impl LorentzMedium {
    pub fn new(eps_inf: f64, omega_p: f64, omega_0: f64) -> Result<Self, DispersionError> {
        for (name, value) in [
            ("eps_inf", eps_inf),
            ("omega_p", omega_p),
            ("omega_0", omega_0),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(DispersionError::InvalidMedium { name, value });
            }
        }
        Ok(LorentzMedium { eps_inf, omega_p, omega_0 })
    }
}

/// Host permittivity at the particle location. Passive media only:
/// `Im >= 0` is enforced at construction, `Re > eps_inf` at use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HostPermittivity {
    value: Complex64,
}

impl HostPermittivity {
    pub fn new(value: Complex64) -> Result<Self, DispersionError> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(DispersionError::NonFiniteHost);
        }
        if value.im < 0.0 {
            return Err(DispersionError::LossyGainHost { im: value.im });
        }
        Ok(HostPermittivity { value })
    }

    pub fn real(re: f64) -> Result<Self, DispersionError> {
        Self::new(Complex64::new(re, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    /// Loss ratio `Im / Re` (the damping bound ingredient).
    pub fn loss_ratio(&self) -> f64 {
        self.value.im / self.value.re
    }

    /// A resonance exists only when the host's real part exceeds the
    /// medium's high-frequency permittivity; callers assembling a full
    /// configuration should validate this up front.
    pub fn check_against(&self, m: &LorentzMedium) -> Result<(), DispersionError> {
        if self.value.re <= m.eps_inf {
            return Err(DispersionError::HostBelowEpsInf {
                re: self.value.re,
                eps_inf: m.eps_inf,
            });
        }
        Ok(())
    }
}

/// A root of the dispersion relation for one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub lambda: f64,
    pub omega: f64,
    pub gamma: f64,
    /// `f(omega, gamma)` re-evaluated at the root; machine-scale by
    /// construction.
    pub residual: Complex64,
    /// First-order sensitivity of `gamma` to host-loss perturbations,
    /// `lambda eps_inf omega_p^2 / (|A|^2 omega)`; reported instead of any
    /// regularization because it grows without bound as `lambda` approaches
    /// the endpoints of (0, 1) where `|A|` can shrink.
    pub condition: f64,
}

/// Frequency-damping rectangle swept by the inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSquare {
    pub omega_min: f64,
    pub omega_max: f64,
    pub gamma_max: f64,
}

impl SweepSquare {
    pub fn contains(&self, omega: f64, gamma: f64) -> bool {
        omega > self.omega_min && omega < self.omega_max && gamma >= 0.0 && gamma < self.gamma_max
    }
}

fn check_frequency(omega: f64, gamma: f64) -> Result<(), DispersionError> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(DispersionError::NonPositiveFrequency { omega });
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(DispersionError::NegativeDamping { gamma });
    }
    Ok(())
}

fn check_lambda(lambda: f64, guarded: bool) -> Result<(), DispersionError> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda < 1.0) {
        return Err(DispersionError::LambdaOutOfRange { lambda });
    }
    if guarded && (lambda - 0.5).abs() <= LAMBDA_GUARD {
        return Err(DispersionError::LambdaNearHalf { lambda });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// permittivity models
// ---------------------------------------------------------------------------

/// Lorentz permittivity
/// `eps_p(omega, gamma) = eps_inf (1 + omega_p^2 / (omega_0^2 - omega^2 + i gamma omega))`.
pub fn lorentz_permittivity(
    m: &LorentzMedium,
    omega: f64,
    gamma: f64,
) -> Result<Complex64, DispersionError> {
    check_frequency(omega, gamma)?;
    let den = Complex64::new(m.omega_0 * m.omega_0 - omega * omega, gamma * omega);
    if den.norm() == 0.0 {
        return Err(DispersionError::UndampedPole { omega_0: m.omega_0 });
    }
    Ok(m.eps_inf * (1.0 + m.omega_p * m.omega_p / den))
}

/// Lorentz permittivity continued to complex frequency (used to verify the
/// complex-root variant of the dispersion relation).
pub fn lorentz_permittivity_complex(
    m: &LorentzMedium,
    omega: Complex64,
    gamma: f64,
) -> Complex64 {
    let den = m.omega_0 * m.omega_0 - omega * omega + Complex64::i() * gamma * omega;
    m.eps_inf * (1.0 + m.omega_p * m.omega_p / den)
}

/// Drude permittivity `eps(omega) = eps_inf - omega_p^2 / (omega^2 + i gamma omega)`
/// (the resonance-free limit; `omega_0` of the medium is ignored).
pub fn drude_permittivity(
    m: &LorentzMedium,
    omega: f64,
    gamma: f64,
) -> Result<Complex64, DispersionError> {
    if omega == 0.0 {
        return Err(DispersionError::DrudePole);
    }
    check_frequency(omega, gamma)?;
    let den = Complex64::new(omega * omega, gamma * omega);
    Ok(Complex64::new(m.eps_inf, 0.0) - m.omega_p * m.omega_p / den)
}

/// Dispersion residual `f(omega, gamma) = eps0 - (eps0 - eps_p) lambda` for
/// one eigenvalue.
pub fn dispersion_residual(
    lambda: f64,
    host: &HostPermittivity,
    m: &LorentzMedium,
    omega: f64,
    gamma: f64,
) -> Result<Complex64, DispersionError> {
    check_lambda(lambda, false)?;
    let eps_p = lorentz_permittivity(m, omega, gamma)?;
    let eps0 = host.value();
    Ok(eps0 - (eps0 - eps_p) * lambda)
}

// ---------------------------------------------------------------------------
// closed-form roots
// ---------------------------------------------------------------------------

/// Closed-form root of the dispersion relation for eigenvalue `lambda`.
///
/// Errors inside the guard zone around 1/2 (the accumulation point of the
/// eigenvalues, where the detuned-residual separation hypothesis fails) and
/// when the host is not a dielectric relative to the medium.
pub fn resonance(
    lambda: f64,
    host: &HostPermittivity,
    m: &LorentzMedium,
) -> Result<Resonance, DispersionError> {
    check_lambda(lambda, true)?;
    host.check_against(m)?;
    let eps0 = host.value();
    let a_factor = eps0 * (1.0 - lambda) + lambda * m.eps_inf;
    let strength = lambda * m.eps_inf * m.omega_p * m.omega_p;
    let a_norm_sq = a_factor.norm_sqr();
    let omega_sq = m.omega_0 * m.omega_0 + strength * a_factor.re / a_norm_sq;
    let omega = omega_sq.sqrt();
    let gamma = strength * (1.0 - lambda) * eps0.im / (a_norm_sq * omega);
    let residual = dispersion_residual(lambda, host, m, omega, gamma)?;
    debug_assert!(
        residual.norm() < 1e-10 * eps0.norm(),
        "closed-form root left residual {residual}"
    );
    Ok(Resonance {
        lambda,
        omega,
        gamma,
        residual,
        condition: strength / (a_norm_sq * omega),
    })
}

/// Lossless-host variant: with `Im eps0 = 0` the root damping vanishes and
/// `omega_n^2 = omega_0^2 + lambda eps_inf omega_p^2 / (lambda eps_inf + (1 - lambda) eps0)`.
pub fn lossless_resonance(
    lambda: f64,
    re_host: f64,
    m: &LorentzMedium,
) -> Result<f64, DispersionError> {
    check_lambda(lambda, true)?;
    let host = HostPermittivity::real(re_host)?;
    host.check_against(m)?;
    let strength = lambda * m.eps_inf * m.omega_p * m.omega_p;
    Ok((m.omega_0 * m.omega_0 + strength / (lambda * m.eps_inf + (1.0 - lambda) * re_host))
        .sqrt())
}

/// Complex-frequency variant at prescribed damping: the two roots
/// `omega = (i gamma +- sqrt(D))/2` with
/// `D = -gamma^2 + 4 (omega_0^2 + lambda eps_inf omega_p^2 / (eps0 (1 - lambda) + eps_inf lambda))`,
/// principal square root. The pair satisfies `omega_+ + omega_- = i gamma`.
pub fn complex_resonance(
    lambda: f64,
    host: &HostPermittivity,
    m: &LorentzMedium,
    gamma: f64,
) -> Result<(Complex64, Complex64), DispersionError> {
    check_lambda(lambda, false)?;
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(DispersionError::NegativeDamping { gamma });
    }
    host.check_against(m)?;
    let eps0 = host.value();
    let a_factor = eps0 * (1.0 - lambda) + lambda * m.eps_inf;
    let strength = lambda * m.eps_inf * m.omega_p * m.omega_p;
    let disc = -gamma * gamma
        + 4.0 * (Complex64::new(m.omega_0 * m.omega_0, 0.0) + strength / a_factor);
    let root = disc.sqrt();
    let ig = Complex64::new(0.0, gamma);
    Ok(((ig + root) / 2.0, (ig - root) / 2.0))
}

/// Sweep rectangle from the medium and the host loss-ratio bound:
/// `omega in (omega_0, sqrt(omega_0^2 + omega_p^2))`,
/// `gamma in (0, omega_max * bound)`, with the damping edge floored at
/// [`GAMMA_FLOOR_FRACTION`]` * omega_max` so lossless hosts still get a
/// nondegenerate square.
pub fn bounds(loss_ratio_bound: f64, m: &LorentzMedium) -> Result<SweepSquare, DispersionError> {
    if !(loss_ratio_bound.is_finite() && loss_ratio_bound >= 0.0) {
        return Err(DispersionError::InvalidBound { bound: loss_ratio_bound });
    }
    if m.omega_p < 1e-6 * m.omega_0 {
        return Err(DispersionError::BandCollapsed {
            omega_p: m.omega_p,
            omega_0: m.omega_0,
        });
    }
    let omega_max = (m.omega_0 * m.omega_0 + m.omega_p * m.omega_p).sqrt();
    let gamma_max = (omega_max * loss_ratio_bound).max(GAMMA_FLOOR_FRACTION * omega_max);
    Ok(SweepSquare { omega_min: m.omega_0, omega_max, gamma_max })
}

// ---------------------------------------------------------------------------
// detuned residuals
// ---------------------------------------------------------------------------

/// Residual magnitudes at the four detuned corners of a root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetunedResidual {
    /// Whether the probed eigenvalue is the resonant one.
    pub resonant: bool,
    /// `|f|` at `(omega^2 +- a^h, gamma +- a^h)` in sign order
    /// (+,+), (+,-), (-,+), (-,-); negative damping clamps to 0.
    pub residuals: [f64; 4],
    /// The detuning magnitude `a^h`.
    pub detuning: f64,
}

/// Evaluate the residual of mode `lambda` at the four `a^h`-detuned corners
/// of the root `at`. On the resonant mode the values scale like `a^h`
/// (order-one multiple); on modes with well-separated eigenvalues they stay
/// at order `|eps0|`. The detuning is applied to `omega^2` (the frequency
/// variable the energy expansion is written in).
pub fn detuned_residual_scale(
    lambda: f64,
    at: &Resonance,
    host: &HostPermittivity,
    m: &LorentzMedium,
    a: f64,
    h: f64,
) -> Result<DetunedResidual, DispersionError> {
    if !(a > 0.0 && a < 1.0 && h > 0.0 && h < 1.0) {
        return Err(DispersionError::InvalidDetuning { a, h });
    }
    check_lambda(lambda, false)?;
    let detuning = a.powf(h);
    let omega_sq = at.omega * at.omega;
    if detuning >= omega_sq {
        return Err(DispersionError::DetuningTooLarge { detuning, omega_sq });
    }
    let mut residuals = [0.0; 4];
    for (k, (s_omega, s_gamma)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .into_iter()
        .enumerate()
    {
        let omega = (omega_sq + s_omega * detuning).sqrt();
        let gamma = (at.gamma + s_gamma * detuning).max(0.0);
        residuals[k] = dispersion_residual(lambda, host, m, omega, gamma)?.norm();
    }
    Ok(DetunedResidual {
        resonant: (lambda - at.lambda).abs() < 1e-12,
        residuals,
        detuning,
    })
}

// ---------------------------------------------------------------------------
// bisection diagnostic
// ---------------------------------------------------------------------------

/// Root of the dispersion relation by bisection of `Re f` along the curve
/// `gamma(omega) = Im(eps0) (1 - lambda) (omega^2 - omega_0^2) / ((Re(eps0)(1 - lambda) + lambda eps_inf) omega)`
/// on which `Im f` vanishes identically. Diagnostic cross-check for
/// [`resonance`]; same preconditions.
pub fn resonance_by_bisection(
    lambda: f64,
    host: &HostPermittivity,
    m: &LorentzMedium,
) -> Result<Resonance, DispersionError> {
    check_lambda(lambda, true)?;
    host.check_against(m)?;
    let eps0 = host.value();
    let re_a = eps0.re * (1.0 - lambda) + lambda * m.eps_inf;
    let gamma_on_curve = |omega: f64| -> f64 {
        (eps0.im * (1.0 - lambda) * (omega * omega - m.omega_0 * m.omega_0) / (re_a * omega))
            .max(0.0)
    };
    let square = bounds(host.loss_ratio().max(0.0), m)?;
    let re_f = |omega: f64| -> Result<f64, DispersionError> {
        Ok(dispersion_residual(lambda, host, m, omega, gamma_on_curve(omega))?.re)
    };
    let width = square.omega_max - square.omega_min;
    let mut lo = square.omega_min + 1e-9 * width;
    let mut hi = square.omega_max - 1e-12 * width;
    let (mut f_lo, f_hi) = (re_f(lo)?, re_f(hi)?);
    if f_lo.signum() == f_hi.signum() {
        return Err(DispersionError::BisectionFailed);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = re_f(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi {
            break;
        }
    }
    let omega = 0.5 * (lo + hi);
    let gamma = gamma_on_curve(omega);
    let residual = dispersion_residual(lambda, host, m, omega, gamma)?;
    let a_factor = eps0 * (1.0 - lambda) + lambda * m.eps_inf;
    Ok(Resonance {
        lambda,
        omega,
        gamma,
        residual,
        condition: lambda * m.eps_inf * m.omega_p * m.omega_p / (a_factor.norm_sqr() * omega),
    })
}
