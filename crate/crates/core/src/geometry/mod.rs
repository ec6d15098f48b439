//! Oblique 3-D → 2-D mapping and its exact inverse.
//!
//! A logical point `(x, y, z)` is first scaled uniformly, then mapped to the
//! screen by
//!
//! ```text
//! sx = x0 + y − x·sin θ
//! sy = y0 − ρ·z + x·cos θ
//! ```
//!
//! Physical `sy` grows downward. The logical `z` is kept alongside the screen
//! pair in a [`MappedPoint`], which is what makes the mapping invertible.
//!
//! In matrix form, `[x0 y0 0] + [x y z] × M = [sx sy z]` with
//!
//! ```text
//!     | −sin θ   cos θ   0 |
//! M = |   1        0     0 |
//!     |   0       −ρ     1 |
//! ```
//!
//! `det M = −cos θ`, which never vanishes for `0 < θ < π/2`.

mod matrix;

pub use matrix::{Matrix3, SINGULARITY_TOLERANCE};

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

/// Distance kept from `0` and `π/2` when validating θ.
pub const THETA_MARGIN: f64 = 1e-6;

pub const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_4;
pub const DEFAULT_RHO_Z: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("theta must lie in [{min}, {max}] radians, got {value}")]
    ThetaOutOfRange { value: f64, min: f64, max: f64 },
    #[error("rho_z must lie in (0, 1], got {0}")]
    RhoZOutOfRange(f64),
    #[error("scale must be finite and positive, got {0}")]
    InvalidScale(f64),
    #[error("origin {axis} must be finite, got {value}")]
    NonFiniteOrigin { axis: &'static str, value: f64 },
    #[error("coordinate {coordinate} is not finite ({value})")]
    NonFiniteCoordinate { coordinate: &'static str, value: f64 },
    #[error("matrix entry ({row}, {col}) is not finite ({value})")]
    NonFiniteEntry { row: usize, col: usize, value: f64 },
    #[error("matrix is singular (determinant {determinant:e})")]
    Singular { determinant: f64 },
}

fn check_finite(coordinate: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(GeometryError::NonFiniteCoordinate { coordinate, value })
    }
}

/// A point in the function's logical coordinate space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl LogicalPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        LogicalPoint { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    fn validate(self) -> Result<Self, GeometryError> {
        check_finite("x", self.x)?;
        check_finite("y", self.y)?;
        check_finite("z", self.z)?;
        Ok(self)
    }
}

impl From<[f64; 3]> for LogicalPoint {
    fn from(v: [f64; 3]) -> Self {
        LogicalPoint::new(v[0], v[1], v[2])
    }
}

/// The stored triple `(sx, sy, z)`: a screen position plus the retained
/// (scaled) logical `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedPoint {
    pub sx: f64,
    pub sy: f64,
    pub z: f64,
}

impl MappedPoint {
    pub const fn new(sx: f64, sy: f64, z: f64) -> Self {
        MappedPoint { sx, sy, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.sx, self.sy, self.z]
    }

    pub(crate) fn validate(self) -> Result<Self, GeometryError> {
        check_finite("sx", self.sx)?;
        check_finite("sy", self.sy)?;
        check_finite("z", self.z)?;
        Ok(self)
    }

    pub fn max_abs_diff(&self, other: &MappedPoint) -> f64 {
        (self.sx - other.sx)
            .abs()
            .max((self.sy - other.sy).abs())
            .max((self.z - other.z).abs())
    }
}

impl From<[f64; 3]> for MappedPoint {
    fn from(v: [f64; 3]) -> Self {
        MappedPoint::new(v[0], v[1], v[2])
    }
}

/// Validated mapping parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    theta: f64,
    rho_z: f64,
    origin_x: f64,
    origin_y: f64,
    scale: f64,
    sin: f64,
    cos: f64,
}

impl Projection {
    pub fn new(
        theta: f64,
        rho_z: f64,
        origin: (f64, f64),
        scale: f64,
    ) -> Result<Self, GeometryError> {
        let (min, max) = (THETA_MARGIN, FRAC_PI_2 - THETA_MARGIN);
        if !(theta >= min && theta <= max) {
            return Err(GeometryError::ThetaOutOfRange { value: theta, min, max });
        }
        if !(rho_z > 0.0 && rho_z <= 1.0) {
            return Err(GeometryError::RhoZOutOfRange(rho_z));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(GeometryError::InvalidScale(scale));
        }
        for (axis, value) in [("x", origin.0), ("y", origin.1)] {
            if !value.is_finite() {
                return Err(GeometryError::NonFiniteOrigin { axis, value });
            }
        }
        Ok(Projection {
            theta,
            rho_z,
            origin_x: origin.0,
            origin_y: origin.1,
            scale,
            sin: theta.sin(),
            cos: theta.cos(),
        })
    }

    /// θ = π/4, ρ = 1, scale 1, with the given origin.
    pub fn with_origin(origin_x: f64, origin_y: f64) -> Result<Self, GeometryError> {
        Projection::new(DEFAULT_THETA, DEFAULT_RHO_Z, (origin_x, origin_y), 1.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rho_z(&self) -> f64 {
        self.rho_z
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.origin_x, self.origin_y)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Maps a logical point to its stored screen triple.
    pub fn forward_map(&self, p: LogicalPoint) -> Result<MappedPoint, GeometryError> {
        let p = p.validate()?;
        let (x, y, z) = (self.scale * p.x, self.scale * p.y, self.scale * p.z);
        Ok(MappedPoint {
            sx: self.origin_x + y - x * self.sin,
            sy: self.origin_y - self.rho_z * z + x * self.cos,
            z,
        })
    }

    /// Recovers the logical point from a stored triple, solving the two
    /// mapping equations for `x` and `y` with `z` known.
    pub fn inverse_map(&self, q: MappedPoint) -> Result<LogicalPoint, GeometryError> {
        let q = q.validate()?;
        let depth = q.sy - self.origin_y + self.rho_z * q.z;
        let x = depth / self.cos;
        let y = q.sx - self.origin_x + depth * (self.sin / self.cos);
        Ok(LogicalPoint {
            x: x / self.scale,
            y: y / self.scale,
            z: q.z / self.scale,
        })
    }

    /// The invertible 3×3 mapping matrix `M` (row-vector convention).
    pub fn forward_matrix(&self) -> Matrix3 {
        Matrix3::from_rows_unchecked([
            [-self.sin, self.cos, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, -self.rho_z, 1.0],
        ])
    }

    /// `M⁻¹` in closed form:
    ///
    /// ```text
    /// |   0        1      0 |
    /// | sec θ    tan θ    0 |
    /// | ρ·sec θ  ρ·tan θ  1 |
    /// ```
    pub fn inverse_matrix_closed_form(&self) -> Matrix3 {
        let sec = 1.0 / self.cos;
        let tan = self.sin / self.cos;
        Matrix3::from_rows_unchecked([
            [0.0, 1.0, 0.0],
            [sec, tan, 0.0],
            [self.rho_z * sec, self.rho_z * tan, 1.0],
        ])
    }

    /// `[x0 y0 0] + (scale·p) × M`, the matrix route of [`Self::forward_map`].
    pub fn forward_map_matrix(&self, p: LogicalPoint) -> Result<MappedPoint, GeometryError> {
        let p = p.validate()?;
        let scaled = [self.scale * p.x, self.scale * p.y, self.scale * p.z];
        let [a, b, c] = self.forward_matrix().apply_row(scaled);
        Ok(MappedPoint::new(self.origin_x + a, self.origin_y + b, c))
    }

    /// `[sx − x0, sy − y0, z] × M⁻¹ / scale`, the matrix route of
    /// [`Self::inverse_map`].
    pub fn inverse_map_matrix(&self, q: MappedPoint) -> Result<LogicalPoint, GeometryError> {
        let q = q.validate()?;
        let inv = self.forward_matrix().inverse()?;
        let [x, y, z] = inv.apply_row(self.shift_to_origin(q));
        Ok(LogicalPoint::new(x / self.scale, y / self.scale, z / self.scale))
    }

    pub(crate) fn shift_to_origin(&self, q: MappedPoint) -> [f64; 3] {
        [q.sx - self.origin_x, q.sy - self.origin_y, q.z]
    }
}

/// Free-function form of [`Projection::forward_map`].
pub fn forward_map(p: LogicalPoint, proj: &Projection) -> Result<MappedPoint, GeometryError> {
    proj.forward_map(p)
}

/// Free-function form of [`Projection::inverse_map`].
pub fn inverse_map(q: MappedPoint, proj: &Projection) -> Result<LogicalPoint, GeometryError> {
    proj.inverse_map(q)
}

pub fn forward_matrix(proj: &Projection) -> Matrix3 {
    proj.forward_matrix()
}

pub fn determinant(m: &Matrix3) -> f64 {
    m.determinant()
}

pub fn adjugate(m: &Matrix3) -> Matrix3 {
    m.adjugate()
}

pub fn inverse_matrix(m: &Matrix3) -> Result<Matrix3, GeometryError> {
    m.inverse()
}
