//! Minimal 2×2 complex matrix algebra.

use crate::{C64, I};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

const Z: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Mat2 {
    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Mat2([[m11, m12], [m21, m22]])
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, Z, Z, ONE)
    }

    pub const fn zero() -> Self {
        Mat2::new(Z, Z, Z, Z)
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2::new(a, Z, Z, b)
    }

    pub fn sigma1() -> Self {
        Mat2::new(Z, ONE, ONE, Z)
    }

    pub fn sigma2() -> Self {
        Mat2::new(Z, -I, I, Z)
    }

    pub fn sigma3() -> Self {
        Mat2::new(ONE, Z, Z, -ONE)
    }

    /// `K = σ₃ + iσ₂ = [[1, 1], [−1, −1]]`, nilpotent.
    pub fn k_matrix() -> Self {
        Mat2::new(ONE, ONE, -ONE, -ONE)
    }

    /// Propagation matrix `T(x) = exp(i k x σ₃)`.
    pub fn propagation(k: f64, x: f64) -> Self {
        let p = C64::from_polar(1.0, k * x);
        Mat2::diag(p, p.conj())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Inverse of a unit-determinant matrix (the adjugate).
    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    pub fn inverse(&self) -> Self {
        self.adjugate().scale(self.det().inv())
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn conj(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[0][1].conj(), m[1][0].conj(), m[1][1].conj())
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Exponential of a traceless matrix `Ω`:
    /// `exp Ω = cosh μ · I + (sinh μ / μ) · Ω` with `μ² = −det Ω`.
    /// Both coefficients are even in μ, so the square-root branch is irrelevant
    /// and the result has unit determinant up to rounding.
    pub fn expm_traceless(&self) -> Self {
        let mu2 = -self.det();
        let (c, s) = if mu2.norm() < 1e-6 {
            // cosh μ = Σ μ^{2j}/(2j)!, sinh μ/μ = Σ μ^{2j}/(2j+1)!
            let m4 = mu2 * mu2;
            (
                ONE + mu2 / 2.0 + m4 / 24.0 + m4 * mu2 / 720.0,
                ONE + mu2 / 6.0 + m4 / 120.0 + m4 * mu2 / 5040.0,
            )
        } else {
            let mu = mu2.sqrt();
            (mu.cosh(), mu.sinh() / mu)
        };
        Mat2::identity().scale(c) + self.scale(s)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}
