//! Symmetric trace-free 3×3 tensors.
//!
//! A [`QTensor`] is stored by its coordinates in a fixed orthonormal basis of
//! the five-dimensional space of symmetric trace-free matrices (Frobenius inner
//! product). The trace-free constraint therefore holds by construction, and
//! the coordinate map is a linear isometry.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{numerics, rng};

const INV_SQRT_6: f64 = 0.408_248_290_463_863_f64;

/// A point of the space of symmetric trace-free 3×3 matrices.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QTensor(pub [f64; 5]);

/// Scalar invariants `tr Q²` and `tr Q³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub i2: f64,
    pub i3: f64,
}

/// Sorted eigenvalues together with an orthogonal frame.
///
/// Rows of `frame` are the unit eigenvectors, so that
/// `frame * Q * frameᵀ = diag(eigenvalues)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: [f64; 3],
    pub frame: Matrix3<f64>,
}

impl QTensor {
    pub const ZERO: QTensor = QTensor([0.0; 5]);

    pub fn new(coords: [f64; 5]) -> Self {
        QTensor(coords)
    }

    /// Orthonormal basis matrix `k` (0..5).
    pub fn basis(k: usize) -> Matrix3<f64> {
        let mut c = [0.0; 5];
        c[k] = 1.0;
        QTensor(c).matrix()
    }

    /// Orthogonal projection of an arbitrary 3×3 matrix onto the space
    /// (symmetric part, trace removed).
    pub fn project(m: &Matrix3<f64>) -> Self {
        QTensor([
            (2.0 * m[(2, 2)] - m[(0, 0)] - m[(1, 1)]) * INV_SQRT_6,
            (m[(0, 0)] - m[(1, 1)]) * FRAC_1_SQRT_2,
            (m[(0, 1)] + m[(1, 0)]) * FRAC_1_SQRT_2,
            (m[(0, 2)] + m[(2, 0)]) * FRAC_1_SQRT_2,
            (m[(1, 2)] + m[(2, 1)]) * FRAC_1_SQRT_2,
        ])
    }

    /// Builds a Q-tensor from a matrix that must already be symmetric and
    /// trace-free up to the configured tolerance.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        let tol = numerics().symmetry_tol * (1.0 + m.abs().max());
        let asym = (m - m.transpose()).abs().max();
        if asym > tol {
            return Err(Error::Precondition(format!("matrix not symmetric (|M - Mᵀ| = {asym:e})")));
        }
        let tr = m.trace();
        if tr.abs() > tol {
            return Err(Error::Precondition(format!("matrix not trace-free (tr = {tr:e})")));
        }
        Ok(Self::project(m))
    }

    /// Full matrix form.
    pub fn matrix(&self) -> Matrix3<f64> {
        let [a, b, c, d, e] = self.0;
        let m00 = -a * INV_SQRT_6 + b * FRAC_1_SQRT_2;
        let m11 = -a * INV_SQRT_6 - b * FRAC_1_SQRT_2;
        let m22 = 2.0 * a * INV_SQRT_6;
        let m01 = c * FRAC_1_SQRT_2;
        let m02 = d * FRAC_1_SQRT_2;
        let m12 = e * FRAC_1_SQRT_2;
        Matrix3::new(m00, m01, m02, m01, m11, m12, m02, m12, m22)
    }

    /// `s (n ⊗ n − Id/3)`; `n` must be a unit vector.
    pub fn from_director(n: &Vector3<f64>, s: f64) -> Result<Self> {
        check_unit(n)?;
        Ok(Self::uniaxial_unchecked(n, s))
    }

    pub(crate) fn uniaxial_unchecked(n: &Vector3<f64>, s: f64) -> Self {
        let m = n * n.transpose() - Matrix3::identity() / 3.0;
        Self::project(&(m * s))
    }

    /// Orthonormal coordinates (identity map on the stored form).
    pub fn encode5(&self) -> [f64; 5] {
        self.0
    }

    pub fn decode5(v: [f64; 5]) -> Self {
        QTensor(v)
    }

    /// Frobenius norm `(tr Q²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn dot(&self, other: &QTensor) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn invariants(&self) -> Invariants {
        let m = self.matrix();
        let m2 = m * m;
        Invariants { i2: self.norm_sq(), i3: (m2 * m).trace() }
    }

    /// `U Q Uᵀ`.
    pub fn conjugate(&self, u: &Matrix3<f64>) -> Self {
        Self::project(&(u * self.matrix() * u.transpose()))
    }

    /// Sorted eigen-decomposition (closed form with Jacobi refinement).
    pub fn eigen(&self) -> EigenDecomposition {
        symmetric_eigen(&self.matrix())
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        self.eigen().eigenvalues
    }

    /// Deterministic pseudo-random tensor with coordinates uniform in
    /// `[-scale, scale]`, hence `|Q| ≤ scale √5`.
    pub fn random(seed: u64, scale: f64) -> Self {
        assert!(scale > 0.0, "scale must be positive");
        let mut r = rng(seed);
        Self::random_with(&mut r, scale)
    }

    pub fn random_with<R: Rng>(r: &mut R, scale: f64) -> Self {
        let mut c = [0.0; 5];
        for x in &mut c {
            *x = r.gen_range(-scale..=scale);
        }
        QTensor(c)
    }
}

/// Rejects vectors whose length deviates from one beyond the configured tolerance.
pub fn check_unit(n: &Vector3<f64>) -> Result<()> {
    let dev = (n.norm() - 1.0).abs();
    if dev > numerics().unit_tol {
        return Err(Error::Precondition(format!("direction is not a unit vector (||n|| - 1 = {dev:e})")));
    }
    Ok(())
}

impl Add for QTensor {
    type Output = QTensor;
    fn add(self, o: QTensor) -> QTensor {
        let mut c = self.0;
        for (x, y) in c.iter_mut().zip(&o.0) {
            *x += y;
        }
        QTensor(c)
    }
}

impl AddAssign for QTensor {
    fn add_assign(&mut self, o: QTensor) {
        for (x, y) in self.0.iter_mut().zip(&o.0) {
            *x += y;
        }
    }
}

impl Sub for QTensor {
    type Output = QTensor;
    fn sub(self, o: QTensor) -> QTensor {
        self + (-o)
    }
}

impl Neg for QTensor {
    type Output = QTensor;
    fn neg(self) -> QTensor {
        QTensor(self.0.map(|x| -x))
    }
}

impl Mul<QTensor> for f64 {
    type Output = QTensor;
    fn mul(self, q: QTensor) -> QTensor {
        QTensor(q.0.map(|x| self * x))
    }
}

/// Eigen-decomposition of a real symmetric 3×3 matrix.
///
/// Eigenvalues come from the trigonometric solution of the characteristic
/// cubic. The eigenvector of the best-separated eigenvalue is taken from the
/// largest cross product of two rows of `A − λI`; the remaining pair is
/// diagonalised inside its orthogonal complement. If the frame does not
/// diagonalise `A` to working precision (clustered spectra), cyclic Jacobi
/// sweeps refine it.
pub fn symmetric_eigen(a: &Matrix3<f64>) -> EigenDecomposition {
    let mean = a.trace() / 3.0;
    let b = a - Matrix3::identity() * mean;
    let p2 = b.norm_squared();
    if p2 <= f64::MIN_POSITIVE {
        return EigenDecomposition { eigenvalues: [mean; 3], frame: Matrix3::identity() };
    }
    let p = (p2 / 6.0).sqrt();
    let r = ((b / p).determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = 2.0 * p * phi.cos();
    let lo = 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let mid = -hi - lo;

    // isolate whichever end of the spectrum has the wider gap
    let isolated = if hi - mid >= mid - lo { hi } else { lo };
    let v0 = null_vector(&(b - Matrix3::identity() * isolated));
    let (e1, e2) = complement_basis(&v0);
    // 2×2 restriction of b to span{e1, e2}
    let b11 = e1.dot(&(b * e1));
    let b22 = e2.dot(&(b * e2));
    let b12 = e1.dot(&(b * e2));
    let theta = 0.5 * (2.0 * b12).atan2(b11 - b22);
    let (s, c) = theta.sin_cos();
    let u1 = e1 * c + e2 * s;
    let u2 = e2 * c - e1 * s;

    let mut frame = Matrix3::from_rows(&[v0.transpose(), u1.transpose(), u2.transpose()]);
    let mut d = frame * b * frame.transpose();
    let off = d[(0, 1)].abs() + d[(0, 2)].abs() + d[(1, 2)].abs();
    let gap = (hi - mid).min(mid - lo);
    if off > 1e-13 * p || gap < numerics().eigen_gap_tol * p {
        jacobi_refine(&mut d, &mut frame);
    }
    let mut pairs = [(d[(0, 0)], 0usize), (d[(1, 1)], 1), (d[(2, 2)], 2)];
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let rows: Vec<_> = pairs.iter().map(|&(_, i)| frame.row(i).into_owned()).collect();
    let mut frame = Matrix3::from_rows(&rows);
    if frame.determinant() < 0.0 {
        frame.row_mut(2).neg_mut();
    }
    EigenDecomposition { eigenvalues: [pairs[0].0 + mean, pairs[1].0 + mean, pairs[2].0 + mean], frame }
}

fn null_vector(m: &Matrix3<f64>) -> Vector3<f64> {
    let r0: Vector3<f64> = m.row(0).transpose();
    let r1: Vector3<f64> = m.row(1).transpose();
    let r2: Vector3<f64> = m.row(2).transpose();
    let cands = [r0.cross(&r1), r0.cross(&r2), r1.cross(&r2)];
    let best =
        cands.iter().max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared())).copied().unwrap_or_else(Vector3::x);
    let n = best.norm();
    if n > 0.0 {
        best / n
    } else {
        Vector3::x()
    }
}

fn complement_basis(v: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let seed = if v.x.abs() < 0.6 { Vector3::x() } else { Vector3::y() };
    let e1 = (seed - v * v.dot(&seed)).normalize();
    let e2 = v.cross(&e1);
    (e1, e2)
}

fn jacobi_refine(d: &mut Matrix3<f64>, frame: &mut Matrix3<f64>) {
    for _sweep in 0..10 {
        let off = d[(0, 1)].abs() + d[(0, 2)].abs() + d[(1, 2)].abs();
        let scale = d.abs().max().max(f64::MIN_POSITIVE);
        if off <= 1e-15 * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if d[(p, q)].abs() <= 1e-300 {
                continue;
            }
            let theta = 0.5 * (2.0 * d[(p, q)]).atan2(d[(p, p)] - d[(q, q)]);
            let (s, c) = theta.sin_cos();
            let mut g = Matrix3::identity();
            g[(p, p)] = c;
            g[(q, q)] = c;
            g[(p, q)] = s;
            g[(q, p)] = -s;
            *d = g * *d * g.transpose();
            *frame = g * *frame;
        }
    }
}

/// Random orthogonal matrix: uniform on SO(3) via a unit quaternion,
/// composed with `diag(1, 1, −1)` on a fair coin flip when `allow_reflection`.
pub fn random_orthogonal<R: Rng>(r: &mut R, allow_reflection: bool) -> Matrix3<f64> {
    let rot = random_rotation(r);
    if allow_reflection && r.gen_bool(0.5) {
        rot * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))
    } else {
        rot
    }
}

/// Uniform random rotation (Shoemake's quaternion method).
pub fn random_rotation<R: Rng>(r: &mut R) -> Matrix3<f64> {
    let u1: f64 = r.gen();
    let u2: f64 = r.gen::<f64>() * std::f64::consts::TAU;
    let u3: f64 = r.gen::<f64>() * std::f64::consts::TAU;
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let (w, x, y, z) = (a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos());
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - z * w),
        2.0 * (x * z + y * w),
        2.0 * (x * y + z * w),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - x * w),
        2.0 * (x * z - y * w),
        2.0 * (y * z + x * w),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Uniform random unit vector.
pub fn random_unit<R: Rng>(r: &mut R) -> Vector3<f64> {
    let z: f64 = r.gen_range(-1.0..=1.0);
    let t: f64 = r.gen::<f64>() * std::f64::consts::TAU;
    let s = (1.0 - z * z).sqrt();
    Vector3::new(s * t.cos(), s * t.sin(), z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::{prop_assert, proptest};

    fn diag(a: f64, b: f64, c: f64) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(a, b, c))
    }

    #[test]
    fn director_examples() {
        let q = QTensor::from_director(&Vector3::x(), 1.0).unwrap();
        assert_relative_eq!(q.matrix(), diag(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0), epsilon = 1e-15);
        let z = QTensor::from_director(&Vector3::new(0.6, 0.8, 0.0), 0.0).unwrap();
        assert_eq!(z.norm(), 0.0);
        let q = QTensor::from_director(&Vector3::z(), -2.0).unwrap();
        assert_relative_eq!(q.matrix(), diag(2.0 / 3.0, 2.0 / 3.0, -4.0 / 3.0), epsilon = 1e-15);
        assert!(QTensor::from_director(&Vector3::new(1.0, 1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn invariants_examples() {
        let q = QTensor::from_director(&Vector3::x(), 1.0).unwrap();
        let inv = q.invariants();
        assert_relative_eq!(inv.i2, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(inv.i3, 2.0 / 9.0, epsilon = 1e-15);
        let zero = QTensor::ZERO.invariants();
        assert_eq!((zero.i2, zero.i3), (0.0, 0.0));
    }

    #[test]
    fn invariants_match_eigenvalue_powers() {
        let q = QTensor::random(7, 1.0);
        let inv = q.invariants();
        let l = q.eigenvalues();
        assert_relative_eq!(inv.i2, l.iter().map(|x| x * x).sum::<f64>(), epsilon = 1e-12);
        assert_relative_eq!(inv.i3, l.iter().map(|x| x * x * x).sum::<f64>(), epsilon = 1e-12);
        let q = QTensor::random(42, 1.0);
        let inv = q.invariants();
        let l = q.eigenvalues();
        assert_relative_eq!(inv.i3, l.iter().map(|x| x.powi(3)).sum::<f64>(), epsilon = 1e-12);
        assert!(inv.i3 * inv.i3 <= inv.i2.powi(3) / 6.0 + 1e-10);
    }

    #[test]
    fn eigen_examples() {
        let q = QTensor::from_director(&Vector3::x(), 1.0).unwrap();
        let e = q.eigen();
        assert_relative_eq!(e.eigenvalues[0], -1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvalues[1], -1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(e.eigenvalues[2], 2.0 / 3.0, epsilon = 1e-14);
        let z = QTensor::ZERO.eigen();
        assert_eq!(z.eigenvalues, [0.0; 3]);
        assert_eq!(z.frame, Matrix3::identity());

        let mut r = rng(3);
        for _ in 0..50 {
            let u = random_orthogonal(&mut r, true);
            let e2 = q.conjugate(&u).eigen();
            for k in 0..3 {
                assert_relative_eq!(e2.eigenvalues[k], e.eigenvalues[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn eigen_agrees_with_nalgebra_oracle() {
        let mut r = rng(11);
        for i in 0..500 {
            // mix of generic, uniaxial and nearly degenerate spectra
            let q = match i % 3 {
                0 => QTensor::random_with(&mut r, 1.0),
                1 => QTensor::uniaxial_unchecked(&random_unit(&mut r), r.gen_range(-2.0..2.0)),
                _ => {
                    let u = random_rotation(&mut r);
                    let d = diag(1.0, 1.0 + 1e-9, -2.0 - 1e-9);
                    QTensor::project(&(u * d * u.transpose()))
                }
            };
            let m = q.matrix();
            let mine = q.eigen();
            let mut oracle: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
            oracle.sort_by(f64::total_cmp);
            for k in 0..3 {
                assert_relative_eq!(mine.eigenvalues[k], oracle[k], epsilon = 1e-12);
            }
            let d = mine.frame * m * mine.frame.transpose();
            assert_relative_eq!(d, Matrix3::from_diagonal(&Vector3::from(mine.eigenvalues)), epsilon = 1e-9);
            assert_relative_eq!(mine.frame * mine.frame.transpose(), Matrix3::identity(), epsilon = 1e-10);
            assert!(mine.eigenvalues.iter().sum::<f64>().abs() < 1e-10);
        }
    }

    #[test]
    fn basis_is_orthonormal_and_trace_free() {
        for a in 0..5 {
            let ea = QTensor::basis(a);
            assert_relative_eq!(ea, ea.transpose());
            assert!(ea.trace().abs() < 1e-15);
            for b in 0..5 {
                let gram = ea.component_mul(&QTensor::basis(b)).sum();
                assert_relative_eq!(gram, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-15);
            }
        }
        assert_eq!(QTensor::decode5([0.0; 5]), QTensor::ZERO);
    }

    #[test]
    fn random_is_deterministic_and_bounded() {
        assert_eq!(QTensor::random(5, 1.0), QTensor::random(5, 1.0));
        let tiny = QTensor::random(5, 1e-300);
        assert!(tiny.norm() < 1e-299);
        for s in 0..100 {
            assert!(QTensor::random(s, 2.0).norm() <= 2.0 * 5f64.sqrt());
        }
    }

    #[test]
    fn from_matrix_rejects_invalid() {
        assert!(QTensor::from_matrix(&Matrix3::identity()).is_err());
        assert!(QTensor::from_matrix(&Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)).is_err());
        let q = QTensor::random(1, 1.0);
        assert_eq!(
            QTensor::from_matrix(&q.matrix()).unwrap().0.map(|x| (x * 1e12).round()),
            q.0.map(|x| (x * 1e12).round())
        );
    }

    proptest! {
        #[test]
        fn encode_is_isometric_roundtrip(seed in 0u64..10_000, scale in 0.01f64..10.0) {
            let q = QTensor::random(seed, scale);
            let m = q.matrix();
            prop_assert!((q.norm() - m.norm()).abs() <= 1e-12 * (1.0 + m.norm()));
            let back = QTensor::project(&m);
            for k in 0..5 {
                prop_assert!((back.0[k] - q.0[k]).abs() <= 1e-14 * (1.0 + scale));
            }
        }

        #[test]
        fn invariants_are_conjugation_invariant(seed in 0u64..100_000) {
            let mut r = rng(seed);
            let q = QTensor::random_with(&mut r, 1.0);
            let u = random_orthogonal(&mut r, true);
            let a = q.invariants();
            let b = q.conjugate(&u).invariants();
            prop_assert!((a.i2 - b.i2).abs() < 1e-10);
            prop_assert!((a.i3 - b.i3).abs() < 1e-10);
        }

        #[test]
        fn projection_is_idempotent(vals in proptest::array::uniform9(-5.0f64..5.0)) {
            let m = Matrix3::from_row_slice(&vals);
            let p1 = QTensor::project(&m);
            let p2 = QTensor::project(&p1.matrix());
            for k in 0..5 {
                prop_assert!((p1.0[k] - p2.0[k]).abs() < 1e-13);
            }
            let direct = (m + m.transpose()) / 2.0 - Matrix3::identity() * (m.trace() / 3.0);
            prop_assert!((p1.matrix() - direct).abs().max() < 1e-13);
        }
    }
}
