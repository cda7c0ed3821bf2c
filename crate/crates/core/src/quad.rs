//! The ordered quadrature basis (X, Y, U, V) and its relation to the field
//! basis (d, d†, b, b†).
//!
//! With phase φ_p the optical quadratures are
//! `X = (e^{-iφ_p/2} d + h.c.)/√2` and `Y = (e^{-iφ_p/2} d − h.c.)/(√2 i)`,
//! and U, V are built the same way from b. The change of basis is unitary
//! and frequency independent.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;
use serde::Serialize;

pub const X: usize = 0;
pub const Y: usize = 1;
pub const U: usize = 2;
pub const V: usize = 3;

pub const QUAD_LABELS: [&str; 4] = ["X", "Y", "U", "V"];

/// Complex 4×4 matrix in the (X, Y, U, V) basis at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadMatrix {
    pub omega: f64,
    pub entries: Matrix4<C64>,
}

impl QuadMatrix {
    pub fn new(omega: f64, entries: Matrix4<C64>) -> Self {
        Self { omega, entries }
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Matrix4<C64>) -> f64 {
        max_abs_diff(&self.entries, other)
    }
}

pub fn max_abs_diff(a: &Matrix4<C64>, b: &Matrix4<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &Matrix4<C64>) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().min()
}

/// Largest entrywise modulus of `m − m†`.
pub fn hermiticity_defect(m: &Matrix4<C64>) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Row-major serializable copy of a complex 4×4 matrix as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixRecord(pub [[[f64; 2]; 4]; 4]);

impl From<&Matrix4<C64>> for MatrixRecord {
    fn from(m: &Matrix4<C64>) -> Self {
        let mut out = [[[0.0; 2]; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = [m[(r, c)].re, m[(r, c)].im];
            }
        }
        MatrixRecord(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FieldToQuadrature,
    QuadratureToField,
}

/// Change of basis between (d, d†, b, b†) and (X, Y, U, V) at phase φ_p.
#[derive(Debug, Clone, Copy)]
pub struct BasisChange {
    forward: Matrix4<C64>,
}

impl BasisChange {
    pub fn new(phi_p: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let em = C64::from_polar(s, -0.5 * phi_p);
        let ep = C64::from_polar(s, 0.5 * phi_p);
        let i = C64::i();
        let z = C64::new(0.0, 0.0);
        #[rustfmt::skip]
        let forward = Matrix4::new(
            em,      ep,     z,       z,
            -i * em, i * ep, z,       z,
            z,       z,      em,      ep,
            z,       z,      -i * em, i * ep,
        );
        Self { forward }
    }

    /// `Q = T a`.
    pub fn forward(&self) -> &Matrix4<C64> {
        &self.forward
    }

    /// `T⁻¹ = T†`.
    pub fn inverse(&self) -> Matrix4<C64> {
        self.forward.adjoint()
    }

    pub fn matrix(&self, m: &Matrix4<C64>, dir: Direction) -> Matrix4<C64> {
        let t = &self.forward;
        let ti = self.inverse();
        match dir {
            Direction::FieldToQuadrature => t * m * ti,
            Direction::QuadratureToField => ti * m * t,
        }
    }

    pub fn vector(&self, v: &Vector4<C64>, dir: Direction) -> Vector4<C64> {
        match dir {
            Direction::FieldToQuadrature => self.forward * v,
            Direction::QuadratureToField => self.inverse() * v,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_maps_to_identity() {
        let b = BasisChange::new(0.7);
        let id = Matrix4::<C64>::identity();
        for dir in [Direction::FieldToQuadrature, Direction::QuadratureToField] {
            assert!(max_abs_diff(&b.matrix(&id, dir), &id) < 1e-15);
        }
    }

    #[test]
    fn d_basis_vector_has_expected_quadratures() {
        // With φ_p = 0, d contributes 1/√2 to X and -i/√2 to Y.
        let b = BasisChange::new(0.0);
        let d = Vector4::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let q = b.vector(&d, Direction::FieldToQuadrature);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q[X] - c(s, 0.0)).norm() < 1e-16);
        assert!((q[Y] - c(0.0, -s)).norm() < 1e-16);
        assert_eq!(q[U], c(0.0, 0.0));
        // A Hermitian combination d + d† is a pure X displacement.
        let x = Vector4::new(c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let q = b.vector(&x, Direction::FieldToQuadrature);
        assert!((q[X] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(q[Y].norm() < 1e-15);
    }

    fn arb_matrix() -> impl Strategy<Value = Matrix4<C64>> {
        proptest::collection::vec(-1.0f64..1.0, 32)
            .prop_map(|v| Matrix4::from_fn(|r, c| C64::new(v[2 * (4 * r + c)], v[2 * (4 * r + c) + 1])))
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(m in arb_matrix(), phi in -7.0f64..7.0) {
            let b = BasisChange::new(phi);
            let there = b.matrix(&m, Direction::FieldToQuadrature);
            let back = b.matrix(&there, Direction::QuadratureToField);
            prop_assert!(max_abs_diff(&back, &m) <= 1e-14);
        }

        #[test]
        fn basis_change_is_unitary(phi in -7.0f64..7.0) {
            let b = BasisChange::new(phi);
            let prod = b.forward() * b.inverse();
            prop_assert!(max_abs_diff(&prod, &Matrix4::identity()) < 1e-15);
        }
    }
}
