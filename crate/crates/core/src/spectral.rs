//! Spectral data of the magnetization operator on a shape.
//!
//! The operator takes a field on the shape to the gradient of the Newtonian
//! single layer of its divergence-type part; it is self-adjoint and bounded
//! with norm 1, vanishes on divergence-free fields with vanishing normal
//! trace, is the identity on curl-free fields with vanishing tangential
//! trace, and its nontrivial spectrum lies in (0, 1]. Acting on constant
//! fields it reduces to a diagonal 3x3 tensor: 1/3 of the identity for the
//! ball, and the classical shape integrals for ellipsoids.
//!
//! Only the three "visible" modes (nonzero field average) couple to an
//! incident plane wave. For the ball the triple is degenerate at eigenvalue
//! 1/3 with axis-aligned averages of known magnitude; for a general
//! ellipsoid the eigenvalues are the shape integrals, while the average
//! magnitudes have no closed form here and are reported as unavailable.

use crate::geometry::{
    polar_quadrature_about, volume_quadrature, GeometryError, Shape, Vec3, MIN_SEMI_AXIS,
};
use nalgebra::Matrix3;
use thiserror::Error;

/// |average of the first visible ball mode| = (2/9) sqrt(pi/3).
pub fn ball_mean_magnitude() -> f64 {
    2.0 / 9.0 * (std::f64::consts::PI / 3.0).sqrt()
}

/// Absolute tolerance for the shape-integral quadrature.
pub const DEMAG_TOLERANCE: f64 = 1e-10;

/// Central-difference step of the finite-difference oracle.
pub const HESSIAN_STEP: f64 = 1e-4;

/// Interior margin (euclidean) required by the finite-difference oracle.
pub const HESSIAN_MARGIN: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("semi-axis r{axis} = {value:e} is degenerate (minimum {MIN_SEMI_AXIS:e})")]
    DegenerateAxis { axis: usize, value: f64 },
    #[error("shape integral did not converge: reached {achieved:e}, target {target:e}")]
    QuadratureNotConverged { achieved: f64, target: f64 },
    #[error("evaluation point within {margin:e} of the boundary; oracle needs clearance {HESSIAN_MARGIN:e}")]
    PointTooCloseToBoundary { margin: f64 },
    #[error("invalid axis index {axis}; expected 0, 1, or 2")]
    InvalidAxis { axis: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

// ---------------------------------------------------------------------------
// shape integrals and the magnetization tensor
// ---------------------------------------------------------------------------

/// Shape integral along `axis` (0-based):
/// `I_j = int_0^inf ds / ((s + r_j^2) sqrt((s + r_1^2)(s + r_2^2)(s + r_3^2)))`.
///
/// Substitution `s = tan^2(theta)` maps to a smooth integrand on
/// [0, pi/2]; Gauss-Legendre orders are doubled until two successive values
/// agree to [`DEMAG_TOLERANCE`] absolutely.
pub fn demag_integral(axes: [f64; 3], axis: usize) -> Result<f64, SpectralError> {
    if axis > 2 {
        return Err(SpectralError::InvalidAxis { axis });
    }
    for (i, &r) in axes.iter().enumerate() {
        if !(r.is_finite() && r >= MIN_SEMI_AXIS) {
            return Err(SpectralError::DegenerateAxis { axis: i + 1, value: r });
        }
    }
    let sq = [axes[0] * axes[0], axes[1] * axes[1], axes[2] * axes[2]];
    let integrand = |theta: f64| -> f64 {
        let t = theta.tan();
        let s = t * t;
        let sec2 = 1.0 + s;
        let prod = (s + sq[0]) * (s + sq[1]) * (s + sq[2]);
        2.0 * t * sec2 / ((s + sq[axis]) * prod.sqrt())
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut prev = f64::NAN;
    let mut order = 16;
    while order <= 512 {
        let (nodes, weights) = crate::geometry::gauss_legendre_on(order, 0.0, half_pi);
        let current: f64 = nodes
            .iter()
            .zip(weights.iter())
            .map(|(&x, &w)| w * integrand(x))
            .sum();
        if (current - prev).abs() <= DEMAG_TOLERANCE {
            return Ok(current);
        }
        prev = current;
        order *= 2;
    }
    Err(SpectralError::QuadratureNotConverged {
        achieved: prev,
        target: DEMAG_TOLERANCE,
    })
}

/// Diagonal action of the magnetization operator on constant fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetizationTensor {
    /// Diagonal entries (N_1, N_2, N_3) in the shape's axis frame.
    pub diag: [f64; 3],
}

impl MagnetizationTensor {
    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn as_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vec3::new(self.diag[0], self.diag[1], self.diag[2]))
    }
}

/// Magnetization tensor of a shape: exactly (1/3, 1/3, 1/3) for the ball
/// (and for any equal-axes ellipsoid, which is the same set), otherwise
/// `N_j = (r1 r2 r3 / 2) I_j` from the shape integrals.
pub fn magnetization_tensor(shape: &Shape) -> Result<MagnetizationTensor, SpectralError> {
    let axes = shape.semi_axes();
    if axes[0] == axes[1] && axes[1] == axes[2] {
        return Ok(MagnetizationTensor { diag: [1.0 / 3.0; 3] });
    }
    let half_product = 0.5 * shape.axis_product();
    let mut diag = [0.0; 3];
    for (j, d) in diag.iter_mut().enumerate() {
        *d = half_product * demag_integral(axes, j)?;
    }
    Ok(MagnetizationTensor { diag })
}

// ---------------------------------------------------------------------------
// eigenmodes
// ---------------------------------------------------------------------------

/// One eigenmode of the magnetization operator.
///
/// `subspace_tag` records which invariant subspace the mode lives in:
/// 1 = divergence-free with vanishing normal trace (eigenvalue 0 block),
/// 2 = curl-free with vanishing tangential trace (eigenvalue 1 block),
/// 3 = the remaining subspace carrying the plasmonic spectrum in (0, 1).
/// Modes tagged 1 or 2 have zero average by construction; tag-3 modes carry
/// an axis-aligned average whose magnitude may be unavailable in closed form
/// (`mean = None`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenMode {
    pub lambda: f64,
    pub subspace_tag: u8,
    /// Axis (0-based) of the mode's average direction.
    pub axis: usize,
    /// Field average over the shape; `None` when the magnitude has no
    /// closed form (general ellipsoids).
    pub mean: Option<Vec3>,
}

impl EigenMode {
    pub fn new(
        lambda: f64,
        subspace_tag: u8,
        axis: usize,
        mean: Option<Vec3>,
    ) -> Result<Self, SpectralError> {
        if axis > 2 {
            return Err(SpectralError::InvalidAxis { axis });
        }
        debug_assert!(
            (1..=3).contains(&subspace_tag),
            "subspace tag must be 1, 2, or 3"
        );
        debug_assert!(
            subspace_tag == 3 || mean == Some(Vec3::zeros()),
            "modes outside subspace 3 have zero average"
        );
        Ok(EigenMode { lambda, subspace_tag, axis, mean })
    }
}

/// The three visible (plane-wave-coupled) modes of a shape, sorted by
/// ascending eigenvalue, ties broken by axis index.
///
/// Ball: the degenerate triple at eigenvalue 1/3 with averages
/// `(2/9) sqrt(pi/3) e_j`. Equal-axes ellipsoids are the ball. General
/// ellipsoids: eigenvalues are the tensor diagonal; average magnitudes are
/// reported as unavailable (`mean = None`).
pub fn visible_modes(shape: &Shape) -> Result<Vec<EigenMode>, SpectralError> {
    let axes = shape.semi_axes();
    let spherical = axes[0] == axes[1] && axes[1] == axes[2];
    let mut modes = Vec::with_capacity(3);
    if spherical {
        let m = ball_mean_magnitude();
        for axis in 0..3 {
            let mut mean = Vec3::zeros();
            mean[axis] = m;
            modes.push(EigenMode::new(1.0 / 3.0, 3, axis, Some(mean))?);
        }
    } else {
        let tensor = magnetization_tensor(shape)?;
        for axis in 0..3 {
            modes.push(EigenMode::new(tensor.diag[axis], 3, axis, None)?);
        }
        modes.sort_by(|a, b| {
            a.lambda
                .partial_cmp(&b.lambda)
                .unwrap()
                .then(a.axis.cmp(&b.axis))
        });
    }
    Ok(modes)
}

// ---------------------------------------------------------------------------
// finite-difference oracle
// ---------------------------------------------------------------------------

/// Newtonian potential of the shape's indicator at an interior point,
/// evaluated with the source-centered polar rule (radial integrand
/// `r^2 / (4 pi r)` is smooth, so the rule keeps spectral accuracy).
pub fn newtonian_potential(shape: &Shape, x: &Vec3, order: usize) -> Result<f64, SpectralError> {
    let v = polar_quadrature_about(
        shape,
        x,
        |y| 1.0 / (4.0 * std::f64::consts::PI * (y - x).norm()),
        order,
    )?;
    Ok(v)
}

/// Numerical action of the magnetization operator on constant fields:
/// minus the Hessian of the Newtonian potential, by central differences of
/// step [`HESSIAN_STEP`]. Independent oracle for [`magnetization_tensor`];
/// requires `x` at least [`HESSIAN_MARGIN`] inside the boundary.
pub fn apply_magnetization_to_constant(
    shape: &Shape,
    x: &Vec3,
    order: usize,
) -> Result<Matrix3<f64>, SpectralError> {
    let axes = shape.semi_axes();
    let scaled: f64 = (0..3).map(|i| (x[i] / axes[i]).powi(2)).sum();
    let min_axis = axes.iter().cloned().fold(f64::MAX, f64::min);
    let clearance = (1.0 - scaled.sqrt()) * min_axis;
    if clearance < HESSIAN_MARGIN {
        return Err(SpectralError::PointTooCloseToBoundary { margin: clearance });
    }
    let h = HESSIAN_STEP;
    let pot = |p: Vec3| newtonian_potential(shape, &p, order);
    let center = pot(*x)?;
    let mut hess = Matrix3::zeros();
    let unit = |i: usize| -> Vec3 {
        let mut e = Vec3::zeros();
        e[i] = 1.0;
        e
    };
    for i in 0..3 {
        let plus = pot(x + h * unit(i))?;
        let minus = pot(x - h * unit(i))?;
        hess[(i, i)] = (plus - 2.0 * center + minus) / (h * h);
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            let pp = pot(x + h * unit(i) + h * unit(j))?;
            let pm = pot(x + h * unit(i) - h * unit(j))?;
            let mp = pot(x - h * unit(i) + h * unit(j))?;
            let mm = pot(x - h * unit(i) - h * unit(j))?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(-hess)
}

/// Average of a vector field over the shape (component-wise volume
/// quadrature). Fields in the tag-1 and tag-2 subspaces average to zero.
pub fn field_average<F>(shape: &Shape, field: F, order: usize) -> Result<Vec3, SpectralError>
where
    F: Fn(&Vec3) -> Vec3,
{
    let mut out = Vec3::zeros();
    for i in 0..3 {
        out[i] = volume_quadrature(shape, |y| field(y)[i], order)?;
    }
    Ok(out)
}
