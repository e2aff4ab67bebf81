//! Shapes, particles, domains, and deterministic quadrature rules.
//!
//! Every shape is centered at the origin with its largest semi-axis
//! normalized to 1; a physical inclusion is a [`Particle`]: the shape scaled
//! by `a` and translated to `z`. All quadrature here is deterministic
//! (Gauss-Legendre tensor rules in polar form), so repeated runs are
//! bit-identical and no RNG enters the numerical core.

use nalgebra::Vector3;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// 3-vector of coordinates.
pub type Vec3 = Vector3<f64>;

/// Semi-axes below this are rejected as numerically degenerate.
pub const MIN_SEMI_AXIS: f64 = 1e-6;

/// Default quadrature order; exact for the unit-ball volume to well below
/// 1e-8 and comfortable for every smooth integrand in the crate.
pub const DEFAULT_ORDER: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("degenerate semi-axis r{axis} = {value:e}; smallest supported is {MIN_SEMI_AXIS:e}")]
    DegenerateAxis { axis: usize, value: f64 },
    #[error("largest semi-axis must be 1 (got {max})")]
    UnnormalizedShape { max: f64 },
    #[error("semi-axes must be finite, got ({r1}, {r2}, {r3})")]
    NonFiniteAxes { r1: f64, r2: f64, r3: f64 },
    #[error("integrand returned a non-finite value at ({x}, {y}, {z})")]
    NonFiniteSample { x: f64, y: f64, z: f64 },
    #[error("sphere radius must be positive, got {radius}")]
    NonPositiveRadius { radius: f64 },
    #[error("quadrature order must be at least 2, got {order}")]
    OrderTooSmall { order: usize },
    #[error("polar center must lie strictly inside the shape")]
    CenterOutsideShape,
    #[error("particle scale must be positive and finite, got {scale}")]
    InvalidScale { scale: f64 },
    #[error("domain radius must be positive and finite, got {radius}")]
    InvalidDomain { radius: f64 },
}

// ---------------------------------------------------------------------------
// shapes
// ---------------------------------------------------------------------------

/// Reference inclusion shape, centered at the origin, largest semi-axis 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Unit ball.
    Ball,
    /// Axis-aligned ellipsoid with semi-axes `(r1, r2, r3)`, max = 1.
    Ellipsoid { r1: f64, r2: f64, r3: f64 },
}

impl Shape {
    /// Validated ellipsoid constructor.
    ///
    /// Rejects non-finite axes, axes below [`MIN_SEMI_AXIS`], and shapes whose
    /// largest semi-axis is not 1 (the normalization the rest of the crate
    /// assumes; rescale into the particle's `scale` instead).
    pub fn ellipsoid(r1: f64, r2: f64, r3: f64) -> Result<Self, GeometryError> {
        if !(r1.is_finite() && r2.is_finite() && r3.is_finite()) {
            return Err(GeometryError::NonFiniteAxes { r1, r2, r3 });
        }
        for (axis, &value) in [r1, r2, r3].iter().enumerate() {
            if value < MIN_SEMI_AXIS {
                return Err(GeometryError::DegenerateAxis { axis: axis + 1, value });
            }
        }
        let max = r1.max(r2).max(r3);
        if (max - 1.0).abs() > 1e-12 {
            return Err(GeometryError::UnnormalizedShape { max });
        }
        Ok(Shape::Ellipsoid { r1, r2, r3 })
    }

    /// Semi-axes as an array; the ball reports `[1, 1, 1]`.
    pub fn semi_axes(&self) -> [f64; 3] {
        match *self {
            Shape::Ball => [1.0, 1.0, 1.0],
            Shape::Ellipsoid { r1, r2, r3 } => [r1, r2, r3],
        }
    }

    /// Largest semi-axis (1 by normalization).
    pub fn max_semi_axis(&self) -> f64 {
        let [r1, r2, r3] = self.semi_axes();
        r1.max(r2).max(r3)
    }

    /// Product of the semi-axes (volume / (4 pi / 3)).
    pub fn axis_product(&self) -> f64 {
        let [r1, r2, r3] = self.semi_axes();
        r1 * r2 * r3
    }

    /// Membership test (boundary counts as inside).
    pub fn contains(&self, x: &Vec3) -> bool {
        let [r1, r2, r3] = self.semi_axes();
        let q = (x[0] / r1).powi(2) + (x[1] / r2).powi(2) + (x[2] / r3).powi(2);
        q <= 1.0
    }

    /// Distance along direction `dir` (unit) from an interior point `p` to
    /// the boundary. Root of the quadratic |diag(1/r) (p + t dir)|^2 = 1.
    pub fn exit_distance(&self, p: &Vec3, dir: &Vec3) -> f64 {
        let [r1, r2, r3] = self.semi_axes();
        let inv = [1.0 / r1, 1.0 / r2, 1.0 / r3];
        let mut a = 0.0;
        let mut b = 0.0;
        let mut c = 0.0;
        for i in 0..3 {
            let pi = p[i] * inv[i];
            let di = dir[i] * inv[i];
            a += di * di;
            b += pi * di;
            c += pi * pi;
        }
        // p interior => c < 1 and the discriminant is positive
        let disc = (b * b + a * (1.0 - c)).max(0.0);
        (-b + disc.sqrt()) / a
    }
}

// ---------------------------------------------------------------------------
// particle and observation domain
// ---------------------------------------------------------------------------

/// Physical inclusion `D = a B + z`: reference shape `B` scaled by `a` and
/// centered at `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub shape: Shape,
    pub center: Vec3,
    pub scale: f64,
}

impl Particle {
    pub fn new(shape: Shape, center: Vec3, scale: f64) -> Result<Self, GeometryError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(GeometryError::InvalidScale { scale });
        }
        Ok(Particle { shape, center, scale })
    }

    /// Diameter along the longest axis: `2 a max_j r_j`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.scale * self.shape.max_semi_axis()
    }

    /// Membership test in physical coordinates.
    pub fn contains(&self, x: &Vec3) -> bool {
        let local = (x - self.center) / self.scale;
        self.shape.contains(&local)
    }

    /// Euclidean distance from `x` to the particle (0 inside).
    ///
    /// Exact for the ball; for ellipsoids the unique Lagrange-multiplier root
    /// of the projection equation is bracketed and bisected to 1e-14.
    pub fn distance_from(&self, x: &Vec3) -> f64 {
        let q = x - self.center;
        match self.shape {
            Shape::Ball => (q.norm() - self.scale).max(0.0),
            Shape::Ellipsoid { r1, r2, r3 } => {
                let axes = [self.scale * r1, self.scale * r2, self.scale * r3];
                let inside: f64 =
                    (0..3).map(|i| (q[i] / axes[i]).powi(2)).sum();
                if inside <= 1.0 {
                    return 0.0;
                }
                // g(t) = sum (A_i q_i / (A_i^2 + t))^2 is strictly decreasing
                // from g(0) > 1; the root gives the surface foot point.
                let g = |t: f64| -> f64 {
                    (0..3)
                        .map(|i| (axes[i] * q[i] / (axes[i] * axes[i] + t)).powi(2))
                        .sum()
                };
                let mut lo = 0.0;
                let mut hi = q.norm() * axes.iter().cloned().fold(f64::MIN, f64::max);
                while g(hi) > 1.0 {
                    hi = 2.0 * hi + 1.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) > 1.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 * (1.0 + hi) {
                        break;
                    }
                }
                let t = 0.5 * (lo + hi);
                let foot = Vec3::new(
                    axes[0] * axes[0] * q[0] / (axes[0] * axes[0] + t),
                    axes[1] * axes[1] * q[1] / (axes[1] * axes[1] + t),
                    axes[2] * axes[2] * q[2] / (axes[2] * axes[2] + t),
                );
                (q - foot).norm()
            }
        }
    }
}

/// Ball-shaped observation domain (the region carrying initial pressure).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallDomain {
    pub center: Vec3,
    pub radius: f64,
}

impl BallDomain {
    pub fn new(center: Vec3, radius: f64) -> Result<Self, GeometryError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::InvalidDomain { radius });
        }
        Ok(BallDomain { center, radius })
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        (x - self.center).norm() <= self.radius
    }

    /// Point on the boundary in direction `dir` (unit) from the center.
    pub fn boundary_point(&self, dir: &Vec3) -> Vec3 {
        self.center + self.radius * dir
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

type GlRule = (Vec<f64>, Vec<f64>);

fn gl_cache() -> &'static Mutex<HashMap<usize, Arc<GlRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GlRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence and cached per order. Safe for concurrent use.
pub fn gauss_legendre(n: usize) -> Arc<GlRule> {
    if let Some(rule) = gl_cache().lock().unwrap().get(&n) {
        return Arc::clone(rule);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                // one clean-up sweep keeps nodes at machine precision
                let mut q0 = 1.0;
                let mut q1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let q2 = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
                    q0 = q1;
                    q1 = q2;
                }
                dp = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                x -= q1 / dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let rule = Arc::new((nodes, weights));
    gl_cache().lock().unwrap().insert(n, Arc::clone(&rule));
    rule
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let nodes = rule.0.iter().map(|&x| mid + half * x).collect();
    let weights = rule.1.iter().map(|&w| w * half).collect();
    (nodes, weights)
}

// ---------------------------------------------------------------------------
// quadrature over shapes and spheres
// ---------------------------------------------------------------------------

fn check_order(order: usize) -> Result<(), GeometryError> {
    if order < 2 {
        return Err(GeometryError::OrderTooSmall { order });
    }
    Ok(())
}

fn check_sample(v: f64, p: &Vec3) -> Result<f64, GeometryError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GeometryError::NonFiniteSample { x: p[0], y: p[1], z: p[2] })
    }
}

/// Volume integral of `f` over the shape.
///
/// Ball: mapped polar rule (Gauss-Legendre radially and in cos(theta),
/// midpoint-uniform azimuth). Ellipsoid: the same unit-ball rule pushed
/// through the affine map `x = (r1 u1, r2 u2, r3 u3)` with Jacobian
/// `r1 r2 r3`, so smooth integrands keep spectral accuracy and constants are
/// integrated exactly. Errors on non-finite integrand values.
pub fn volume_quadrature<F>(shape: &Shape, f: F, order: usize) -> Result<f64, GeometryError>
where
    F: Fn(&Vec3) -> f64,
{
    check_order(order)?;
    let [r1, r2, r3] = shape.semi_axes();
    let jac = shape.axis_product();
    let (rad_n, rad_w) = gauss_legendre_on(order, 0.0, 1.0);
    let mu = gauss_legendre(order);
    let n_phi = 2 * order;
    let w_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut total = 0.0;
    for (mk, mw) in mu.0.iter().zip(mu.1.iter()) {
        let s = (1.0 - mk * mk).sqrt();
        for j in 0..n_phi {
            let phi = w_phi * (j as f64 + 0.5);
            let (dx, dy, dz) = (s * phi.cos(), s * phi.sin(), *mk);
            for (rk, rw) in rad_n.iter().zip(rad_w.iter()) {
                let p = Vec3::new(r1 * rk * dx, r2 * rk * dy, r3 * rk * dz);
                let v = check_sample(f(&p), &p)?;
                total += mw * w_phi * rw * rk * rk * v;
            }
        }
    }
    Ok(total * jac)
}

/// Volume integral of `f` over the shape using rays from an interior point.
///
/// Rays from `center` are clipped against the (convex) boundary, so the rule
/// stays accurate for integrands like the Newtonian kernel that are weakly
/// singular exactly at `center`: the radial factor `r^2 f` is then smooth.
pub fn polar_quadrature_about<F>(
    shape: &Shape,
    center: &Vec3,
    f: F,
    order: usize,
) -> Result<f64, GeometryError>
where
    F: Fn(&Vec3) -> f64,
{
    check_order(order)?;
    let [r1, r2, r3] = shape.semi_axes();
    let q = (center[0] / r1).powi(2) + (center[1] / r2).powi(2) + (center[2] / r3).powi(2);
    if q >= 1.0 {
        return Err(GeometryError::CenterOutsideShape);
    }
    let mu = gauss_legendre(order);
    let radial = gauss_legendre(order);
    let n_phi = 2 * order;
    let w_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut total = 0.0;
    for (mk, mw) in mu.0.iter().zip(mu.1.iter()) {
        let s = (1.0 - mk * mk).sqrt();
        for j in 0..n_phi {
            let phi = w_phi * (j as f64 + 0.5);
            let dir = Vec3::new(s * phi.cos(), s * phi.sin(), *mk);
            let len = shape.exit_distance(center, &dir);
            let half = 0.5 * len;
            for (rk, rw) in radial.0.iter().zip(radial.1.iter()) {
                let r = half * (rk + 1.0);
                let p = center + r * dir;
                let v = check_sample(f(&p), &p)?;
                total += mw * w_phi * rw * half * r * r * v;
            }
        }
    }
    Ok(total)
}

/// Surface integral of `f` over the full sphere of given center and radius.
///
/// Product rule: Gauss-Legendre in cos(theta), midpoint-uniform azimuth;
/// exact for low-degree spherical polynomials at fixed order.
pub fn sphere_surface_quadrature<F>(
    center: &Vec3,
    radius: f64,
    f: F,
    order: usize,
) -> Result<f64, GeometryError>
where
    F: Fn(&Vec3) -> f64,
{
    sphere_band_quadrature(center, radius, &Vec3::new(0.0, 0.0, 1.0), -1.0, 1.0, f, order)
}

/// Surface integral of `f` over the band `{ y = c + R w : w . axis in
/// [mu_lo, mu_hi] }` of the sphere.
///
/// The polar axis of the product rule is aligned with `axis`, so a cap cut
/// out by a second ball is integrated with the indicator resolved exactly
/// and the rule sees only the smooth field.
pub fn sphere_band_quadrature<F>(
    center: &Vec3,
    radius: f64,
    axis: &Vec3,
    mu_lo: f64,
    mu_hi: f64,
    f: F,
    order: usize,
) -> Result<f64, GeometryError>
where
    F: Fn(&Vec3) -> f64,
{
    check_order(order)?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(GeometryError::NonPositiveRadius { radius });
    }
    if mu_hi <= mu_lo {
        return Ok(0.0);
    }
    let (e1, e2, e3) = orthonormal_frame(axis);
    let (mu_n, mu_w) = gauss_legendre_on(order, mu_lo.max(-1.0), mu_hi.min(1.0));
    let n_phi = 2 * order;
    let w_phi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut total = 0.0;
    for (mk, mw) in mu_n.iter().zip(mu_w.iter()) {
        let s = (1.0 - mk * mk).max(0.0).sqrt();
        for j in 0..n_phi {
            let phi = w_phi * (j as f64 + 0.5);
            let dir = s * (phi.cos() * e1 + phi.sin() * e2) + *mk * e3;
            let p = center + radius * dir;
            let v = check_sample(f(&p), &p)?;
            total += mw * w_phi * v;
        }
    }
    Ok(total * radius * radius)
}

/// Deterministic right-handed orthonormal frame with `e3` along `axis`.
fn orthonormal_frame(axis: &Vec3) -> (Vec3, Vec3, Vec3) {
    let e3 = axis.normalize();
    let seed = if e3[0].abs() <= e3[1].abs() && e3[0].abs() <= e3[2].abs() {
        Vec3::new(1.0, 0.0, 0.0)
    } else if e3[1].abs() <= e3[2].abs() {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let e1 = (seed - seed.dot(&e3) * e3).normalize();
    let e2 = e3.cross(&e1);
    (e1, e2, e3)
}
