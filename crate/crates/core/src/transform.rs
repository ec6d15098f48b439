//! 3-D graphics transforms applied directly to mapped points.
//!
//! Moving an already-mapped point through a logical transform `T` takes
//! three steps: invert the mapping, multiply by `T`, map again. Because the
//! matrices associate, the chain collapses to one precomputed matrix
//! `M′ = M⁻¹ × T × M`, and `M⁻¹ × Tⁿ × M = (M′)ⁿ`, so repeated application
//! only needs powers of `M′`.
//!
//! The mapping is affine (the screen origin is added after `M`), so
//! [`ComposedTransform::apply`] shifts the point to the origin, multiplies,
//! and shifts back.

use std::fmt;

use thiserror::Error;

use crate::geometry::{GeometryError, MappedPoint, Matrix3, Projection};

/// Rotations must have a determinant within this distance of 1.
pub const ROTATION_DET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("scale factor must be finite and non-zero, got {0}")]
    InvalidScale(f64),
    #[error("rotation angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformKind {
    Rotation(Axis),
    UniformScale,
    Custom,
}

/// A linear transform of logical space, `p' = p × matrix`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphicsTransform {
    matrix: Matrix3,
    kind: TransformKind,
}

impl GraphicsTransform {
    pub const IDENTITY: GraphicsTransform = GraphicsTransform {
        matrix: Matrix3::IDENTITY,
        kind: TransformKind::Custom,
    };

    /// Right-handed rotation about `axis` for row vectors. A quarter turn
    /// about Z takes `[1, 0, 0]` to `[0, 1, 0]`.
    pub fn rotation(axis: Axis, angle: f64) -> Result<Self, TransformError> {
        if !angle.is_finite() {
            return Err(TransformError::NonFiniteAngle(angle));
        }
        let (s, c) = angle.sin_cos();
        let rows = match axis {
            Axis::X => [[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]],
            Axis::Y => [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]],
            Axis::Z => [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]],
        };
        Ok(GraphicsTransform {
            matrix: Matrix3::new(rows)?,
            kind: TransformKind::Rotation(axis),
        })
    }

    pub fn uniform_scale(s: f64) -> Result<Self, TransformError> {
        if !(s.is_finite() && s != 0.0) {
            return Err(TransformError::InvalidScale(s));
        }
        Ok(GraphicsTransform {
            matrix: Matrix3::from_diagonal([s, s, s]),
            kind: TransformKind::UniformScale,
        })
    }

    pub fn custom(matrix: Matrix3) -> Self {
        GraphicsTransform {
            matrix,
            kind: TransformKind::Custom,
        }
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.matrix
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GraphicsTransform) -> GraphicsTransform {
        let kind = match (self.kind, next.kind) {
            (TransformKind::Rotation(a), TransformKind::Rotation(b)) if a == b => {
                TransformKind::Rotation(a)
            }
            (TransformKind::UniformScale, TransformKind::UniformScale) => {
                TransformKind::UniformScale
            }
            _ => TransformKind::Custom,
        };
        GraphicsTransform {
            matrix: self.matrix * next.matrix,
            kind,
        }
    }

    /// `Tⁿ` by repeated multiplication.
    pub fn pow(&self, n: u32) -> GraphicsTransform {
        if n == 0 {
            return GraphicsTransform::IDENTITY;
        }
        GraphicsTransform {
            matrix: self.matrix.pow(n),
            kind: self.kind,
        }
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        self.matrix.apply_row(p)
    }
}

impl Default for GraphicsTransform {
    fn default() -> Self {
        GraphicsTransform::IDENTITY
    }
}

/// `M′ = M⁻¹ × T × M` together with the screen origin it conjugates around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposedTransform {
    m_prime: Matrix3,
    origin_x: f64,
    origin_y: f64,
}

impl ComposedTransform {
    pub fn compose(proj: &Projection, t: &GraphicsTransform) -> Result<Self, TransformError> {
        let m = proj.forward_matrix();
        let m_inv = m.inverse()?;
        let (origin_x, origin_y) = proj.origin();
        Ok(ComposedTransform {
            m_prime: m_inv * *t.matrix() * m,
            origin_x,
            origin_y,
        })
    }

    /// The no-op transform for `proj`'s origin.
    pub fn identity(proj: &Projection) -> Self {
        let (origin_x, origin_y) = proj.origin();
        ComposedTransform {
            m_prime: Matrix3::IDENTITY,
            origin_x,
            origin_y,
        }
    }

    pub fn m_prime(&self) -> &Matrix3 {
        &self.m_prime
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.origin_x, self.origin_y)
    }

    /// `([sx − x0, sy − y0, z] × M′) + [x0, y0, 0]`.
    pub fn apply(&self, q: MappedPoint) -> Result<MappedPoint, TransformError> {
        let q = q.validate()?;
        Ok(self.apply_unchecked(q))
    }

    pub(crate) fn apply_unchecked(&self, q: MappedPoint) -> MappedPoint {
        let [a, b, c] = self
            .m_prime
            .apply_row([q.sx - self.origin_x, q.sy - self.origin_y, q.z]);
        MappedPoint::new(a + self.origin_x, b + self.origin_y, c)
    }

    /// `(M′)ⁿ` by incremental multiplication. `n = 0` yields the identity.
    pub fn power(&self, n: u32) -> ComposedTransform {
        let mut acc = if n == 0 { Matrix3::IDENTITY } else { self.m_prime };
        for _ in 1..n {
            acc = acc * self.m_prime;
        }
        ComposedTransform {
            m_prime: acc,
            ..*self
        }
    }

    /// `self` followed by `next`. Both must share a screen origin.
    pub fn then(&self, next: &ComposedTransform) -> ComposedTransform {
        debug_assert_eq!(self.origin(), next.origin());
        ComposedTransform {
            m_prime: self.m_prime * next.m_prime,
            ..*self
        }
    }

    /// Iterator over `(M′)¹, (M′)², …`, each one multiplication past the last.
    pub fn powers(&self) -> Powers {
        Powers {
            base: *self,
            current: None,
        }
    }
}

pub struct Powers {
    base: ComposedTransform,
    current: Option<Matrix3>,
}

impl Iterator for Powers {
    type Item = ComposedTransform;

    fn next(&mut self) -> Option<ComposedTransform> {
        let next = match self.current {
            None => self.base.m_prime,
            Some(m) => m * self.base.m_prime,
        };
        self.current = Some(next);
        Some(ComposedTransform {
            m_prime: next,
            ..self.base
        })
    }
}

pub fn compose(proj: &Projection, t: &GraphicsTransform) -> Result<ComposedTransform, TransformError> {
    ComposedTransform::compose(proj, t)
}

pub fn apply(ct: &ComposedTransform, q: MappedPoint) -> Result<MappedPoint, TransformError> {
    ct.apply(q)
}

pub fn power(ct: &ComposedTransform, n: u32) -> ComposedTransform {
    ct.power(n)
}

/// The three ways of moving mapped points through `Tⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Inverse map, multiply by `T`, map again, for every point.
    NaiveThreeStep,
    /// Rebuild `M⁻¹ × Tⁿ × M` once, then one product per point.
    Precomposed,
    /// Extend an existing `M′` to `(M′)ⁿ`, then one product per point.
    IncrementalPower,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::NaiveThreeStep,
        Strategy::Precomposed,
        Strategy::IncrementalPower,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::NaiveThreeStep => "naive-3-step",
            Strategy::Precomposed => "precomposed",
            Strategy::IncrementalPower => "incremental-power",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Multiplication tally for one strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MultiplicationCount {
    /// 3×3 by 3×3 products.
    pub matrix_matrix: u64,
    /// 1×3 row by 3×3 products.
    pub point_matrix: u64,
}

/// Matrix–matrix products charged for building `M⁻¹ × Tⁿ × M` from scratch:
/// `n` for the power (none when `n = 1`, since `T` is given) and two for the
/// conjugation. This is the `n + 2` count for `n ≥ 2`.
pub fn recompute_cost(n: u32) -> u64 {
    let power = if n <= 1 { 0 } else { u64::from(n) };
    power + 2
}

/// Products performed by `strategy` to move `points` mapped points through
/// `Tⁿ`.
///
/// * naive: each point rebuilds the conjugated matrix ([`recompute_cost`]
///   matrix–matrix products, 2 when `n = 1`) and runs the literal three steps
///   as point–matrix products (`P × M⁻¹`, `× Tⁿ`, `× M`).
/// * precomposed: one [`recompute_cost`] for all points, one point–matrix
///   product per point.
/// * incremental-power: `n − 1` products extending an existing `M′`, one
///   point–matrix product per point.
pub fn count_multiplications(strategy: Strategy, points: u64, n: u32) -> MultiplicationCount {
    match strategy {
        Strategy::NaiveThreeStep => MultiplicationCount {
            matrix_matrix: points * recompute_cost(n),
            point_matrix: points * 3,
        },
        Strategy::Precomposed => MultiplicationCount {
            matrix_matrix: recompute_cost(n),
            point_matrix: points,
        },
        Strategy::IncrementalPower => MultiplicationCount {
            matrix_matrix: u64::from(n.saturating_sub(1)),
            point_matrix: points,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LogicalPoint;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Plain triple loop, independent of `Matrix3`'s `Mul`.
    fn product(a: &Matrix3, b: &Matrix3) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j] += a[(i, k)] * b[(k, j)];
                }
            }
        }
        out
    }

    fn random_rotation(rng: &mut impl Rng) -> GraphicsTransform {
        let axis = [Axis::X, Axis::Y, Axis::Z][rng.gen_range(0..3)];
        GraphicsTransform::rotation(axis, rng.gen_range(-PI..PI)).unwrap()
    }

    fn proj() -> Projection {
        Projection::new(FRAC_PI_4, 1.0, (320.0, 240.0), 40.0).unwrap()
    }

    #[test]
    fn zero_rotation_is_identity() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let r = GraphicsTransform::rotation(axis, 0.0).unwrap();
            assert_eq!(*r.matrix(), Matrix3::IDENTITY);
        }
    }

    #[test]
    fn quarter_turns_are_right_handed() {
        let rz = GraphicsTransform::rotation(Axis::Z, FRAC_PI_2).unwrap();
        let v = rz.apply([1.0, 0.0, 0.0]);
        assert!((v[0]).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15 && v[2] == 0.0);
        let rx = GraphicsTransform::rotation(Axis::X, FRAC_PI_2).unwrap();
        let v = rx.apply([0.0, 1.0, 0.0]);
        assert!((v[2] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15);
        let ry = GraphicsTransform::rotation(Axis::Y, FRAC_PI_2).unwrap();
        let v = ry.apply([0.0, 0.0, 1.0]);
        assert!((v[0] - 1.0).abs() < 1e-15 && v[2].abs() < 1e-15);
    }

    #[test]
    fn rotations_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = GraphicsTransform::rotation(Axis::X, 0.3).unwrap();
        let rrt = product(r.matrix(), &r.matrix().transpose());
        assert!(Matrix3::new(rrt).unwrap().max_abs_diff(&Matrix3::IDENTITY) < 1e-12);
        for _ in 0..200 {
            let r = random_rotation(&mut rng);
            assert!((r.matrix().determinant() - 1.0).abs() < ROTATION_DET_TOLERANCE);
        }
    }

    #[test]
    fn non_finite_angle_rejected() {
        assert!(GraphicsTransform::rotation(Axis::Y, f64::NAN).is_err());
    }

    #[test]
    fn uniform_scale_cases() {
        assert_eq!(*GraphicsTransform::uniform_scale(1.0).unwrap().matrix(), Matrix3::IDENTITY);
        let s2 = GraphicsTransform::uniform_scale(2.0).unwrap();
        assert_eq!(s2.apply([1.0, 2.0, 3.0]), [2.0, 4.0, 6.0]);
        assert_eq!(
            GraphicsTransform::uniform_scale(0.0),
            Err(TransformError::InvalidScale(0.0))
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let s: f64 = rng.gen_range(-5.0..5.0);
            let t = GraphicsTransform::uniform_scale(s).unwrap();
            assert!((t.matrix().determinant() - s * s * s).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_identity_is_identity() {
        let ct = ComposedTransform::compose(&proj(), &GraphicsTransform::IDENTITY).unwrap();
        assert!(ct.m_prime().max_abs_diff(&Matrix3::IDENTITY) < 1e-12);
        let q = MappedPoint::new(12.5, -3.0, 7.0);
        assert!(ct.apply(q).unwrap().max_abs_diff(&q) < 1e-12);
    }

    #[test]
    fn compose_matches_triple_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = Projection::new(rng.gen_range(0.1..1.4), rng.gen_range(0.1..=1.0), (0.0, 0.0), 1.0)
                .unwrap();
            let t = random_rotation(&mut rng);
            let m = p.forward_matrix();
            let inv = p.inverse_matrix_closed_form();
            let left = Matrix3::new(product(&inv, t.matrix())).unwrap();
            let expected = Matrix3::new(product(&left, &m)).unwrap();
            let ct = ComposedTransform::compose(&p, &t).unwrap();
            assert!(ct.m_prime().max_abs_diff(&expected) < 1e-9);
        }
    }

    #[test]
    fn apply_matches_three_step_procedure() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = proj();
        let t = GraphicsTransform::rotation(Axis::Z, 0.7).unwrap();
        let ct = ComposedTransform::compose(&p, &t).unwrap();
        for _ in 0..1000 {
            let q = p
                .forward_map(LogicalPoint::new(
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                ))
                .unwrap();
            let logical = p.inverse_map(q).unwrap();
            let moved = LogicalPoint::from(t.apply(logical.to_array()));
            let expected = p.forward_map(moved).unwrap();
            assert!(ct.apply(q).unwrap().max_abs_diff(&expected) < 1e-9);
        }
    }

    #[test]
    fn opposite_rotations_cancel() {
        let p = proj();
        let a = ComposedTransform::compose(&p, &GraphicsTransform::rotation(Axis::Y, 0.4).unwrap())
            .unwrap();
        let b = ComposedTransform::compose(&p, &GraphicsTransform::rotation(Axis::Y, -0.4).unwrap())
            .unwrap();
        let q = MappedPoint::new(400.0, 100.0, 30.0);
        let back = b.apply(a.apply(q).unwrap()).unwrap();
        assert!(back.max_abs_diff(&q) < 1e-9);
    }

    #[test]
    fn power_edge_cases() {
        let p = proj();
        let ct =
            ComposedTransform::compose(&p, &GraphicsTransform::rotation(Axis::X, 0.2).unwrap()).unwrap();
        assert_eq!(ct.power(1), ct);
        assert_eq!(*ct.power(0).m_prime(), Matrix3::IDENTITY);
    }

    #[test]
    fn full_turn_closes() {
        let p = proj();
        for n in 1..=12 {
            let step = GraphicsTransform::rotation(Axis::Z, 2.0 * PI / f64::from(n)).unwrap();
            let ct = ComposedTransform::compose(&p, &step).unwrap();
            assert!(ct.power(n).m_prime().max_abs_diff(&Matrix3::IDENTITY) < 1e-8, "n = {n}");
        }
    }

    #[test]
    fn powers_iterator_matches_power() {
        let p = proj();
        let ct =
            ComposedTransform::compose(&p, &GraphicsTransform::rotation(Axis::Y, 0.3).unwrap()).unwrap();
        for (k, pk) in ct.powers().take(6).enumerate() {
            assert_eq!(pk, ct.power(k as u32 + 1));
        }
    }

    #[test]
    fn rotations_preserve_logical_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = proj();
        for _ in 0..500 {
            let ct = ComposedTransform::compose(&p, &random_rotation(&mut rng)).unwrap();
            let q = MappedPoint::new(
                rng.gen_range(0.0..640.0),
                rng.gen_range(0.0..480.0),
                rng.gen_range(-100.0..100.0),
            );
            let before = p.inverse_map(q).unwrap().norm();
            let after = p.inverse_map(ct.apply(q).unwrap()).unwrap().norm();
            assert!((before - after).abs() < 1e-9);
        }
    }

    #[test]
    fn multiplication_counts() {
        for points in [0, 1, 1000] {
            assert_eq!(count_multiplications(Strategy::Precomposed, points, 1).matrix_matrix, 2);
        }
        assert_eq!(
            count_multiplications(Strategy::NaiveThreeStep, 0, 1),
            MultiplicationCount::default()
        );
        assert_eq!(count_multiplications(Strategy::NaiveThreeStep, 10, 1).matrix_matrix, 20);
        assert_eq!(count_multiplications(Strategy::Precomposed, 0, 5).matrix_matrix, 7);
        assert_eq!(count_multiplications(Strategy::IncrementalPower, 0, 5).matrix_matrix, 4);
        assert_eq!(count_multiplications(Strategy::IncrementalPower, 9, 1).matrix_matrix, 0);
        assert_eq!(count_multiplications(Strategy::IncrementalPower, 9, 1).point_matrix, 9);
    }
}
