//! 3×3 matrices under the row-vector convention.
//!
//! Points are 1×3 rows multiplied on the left: `p' = p × M`. A product
//! `A × B` therefore applies `A` first and `B` second.

use std::fmt;
use std::ops::{Index, Mul};

use super::GeometryError;

/// Determinants at or below this magnitude are treated as singular by
/// [`Matrix3::inverse`].
pub const SINGULARITY_TOLERANCE: f64 = 1e-9;

/// A row-major 3×3 matrix of `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix3 {
    rows: [[f64; 3]; 3],
}

impl Matrix3 {
    pub const IDENTITY: Matrix3 = Matrix3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const ZERO: Matrix3 = Matrix3 { rows: [[0.0; 3]; 3] };

    /// Builds a matrix from rows, rejecting non-finite entries.
    pub fn new(rows: [[f64; 3]; 3]) -> Result<Self, GeometryError> {
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(GeometryError::NonFiniteEntry { row: r, col: c, value: v });
                }
            }
        }
        Ok(Matrix3 { rows })
    }

    /// Builds a matrix without the finiteness check. Callers guarantee the
    /// entries are finite.
    pub(crate) const fn from_rows_unchecked(rows: [[f64; 3]; 3]) -> Self {
        Matrix3 { rows }
    }

    pub fn from_diagonal(d: [f64; 3]) -> Self {
        Matrix3 {
            rows: [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]],
        }
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    pub fn transpose(&self) -> Self {
        let m = &self.rows;
        Matrix3 {
            rows: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut rows = self.rows;
        rows.iter_mut().flatten().for_each(|v| *v *= s);
        Matrix3 { rows }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn determinant(&self) -> f64 {
        let m = &self.rows;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Classical adjugate: the transpose of the cofactor matrix, so that
    /// `m × adj(m) = adj(m) × m = det(m)·I`.
    pub fn adjugate(&self) -> Self {
        let m = &self.rows;
        let cofactor = |r: usize, c: usize| -> f64 {
            let (r0, r1) = match r {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c0, c1) = match c {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minor = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
            if (r + c) % 2 == 0 {
                minor
            } else {
                -minor
            }
        };
        let mut adj = [[0.0; 3]; 3];
        for (r, row) in adj.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                // transposed
                *v = cofactor(c, r);
            }
        }
        Matrix3 { rows: adj }
    }

    /// `adj(m) / det(m)`. Fails when `|det(m)| <= SINGULARITY_TOLERANCE`.
    pub fn inverse(&self) -> Result<Self, GeometryError> {
        let det = self.determinant();
        if !(det.abs() > SINGULARITY_TOLERANCE) {
            return Err(GeometryError::Singular { determinant: det });
        }
        Ok(self.adjugate().scaled(1.0 / det))
    }

    /// Row vector times matrix: `v × self`.
    pub fn apply_row(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.rows;
        [
            v[0] * m[0][0] + v[1] * m[1][0] + v[2] * m[2][0],
            v[0] * m[0][1] + v[1] * m[1][1] + v[2] * m[2][1],
            v[0] * m[0][2] + v[1] * m[1][2] + v[2] * m[2][2],
        ]
    }

    /// `self^n` by repeated multiplication; `n = 0` gives the identity.
    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Matrix3::IDENTITY, |acc, _| acc * *self)
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix3) -> f64 {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Default for Matrix3 {
    fn default() -> Self {
        Matrix3::IDENTITY
    }
}

impl Index<(usize, usize)> for Matrix3 {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.rows[r][c]
    }
}

impl Mul for Matrix3 {
    type Output = Matrix3;

    fn mul(self, rhs: Matrix3) -> Matrix3 {
        let a = &self.rows;
        let b = &rhs.rows;
        let mut out = [[0.0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
            }
        }
        Matrix3 { rows: out }
    }
}

impl fmt::Display for Matrix3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} {} {}", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}
