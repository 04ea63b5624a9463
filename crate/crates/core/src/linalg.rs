//! Dense 2×2 complex matrices and the Pauli operators.

use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::Float;

pub type C64 = Complex64;

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);

    pub const fn new(a: C64, b: C64, cc: C64, d: C64) -> Self {
        Mat2([[a, b], [cc, d]])
    }

    pub const fn diag(a: C64, d: C64) -> Self {
        Mat2([[a, c(0.0, 0.0)], [c(0.0, 0.0), d]])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    /// `self · rho · self†`.
    #[inline]
    pub fn conjugate(&self, rho: &Mat2) -> Mat2 {
        *self * *rho * self.dagger()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for col in 0..2 {
                worst = worst.max((self.0[r][col] - other.0[r][col]).norm());
            }
        }
        worst
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// `exp(-i (angle/2) n·σ)` for a unit axis `n`.
    pub fn su2_rotation(angle: f64, axis: [f64; 3]) -> Mat2 {
        let (s, co) = (angle / 2.0).sin_cos();
        let [nx, ny, nz] = axis;
        Mat2::new(
            c(co, -s * nz),
            c(-s * ny, -s * nx),
            c(s * ny, -s * nx),
            c(co, s * nz),
        )
    }

    /// `exp(-i (a·σ))` for an arbitrary real vector `a` (not necessarily unit).
    pub fn exp_i_pauli(a: [f64; 3]) -> Mat2 {
        let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if norm == 0.0 {
            return IDENTITY;
        }
        Mat2::su2_rotation(2.0 * norm, [a[0] / norm, a[1] / norm, a[2] / norm])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    #[inline]
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale_re(-1.0)
    }
}

pub const IDENTITY: Mat2 = Mat2::diag(c(1.0, 0.0), c(1.0, 0.0));
pub const SIGMA_X: Mat2 = Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
pub const SIGMA_Y: Mat2 = Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0));
/// `σz`, with `|↑⟩ = (1, 0)` as the +1 eigenvector.
pub const SIGMA_Z: Mat2 = Mat2::diag(c(1.0, 0.0), c(-1.0, 0.0));

#[cfg(test)]
mod tests {
    use super::*;

    const I_UNIT: C64 = c(0.0, 1.0);

    #[test]
    fn pauli_algebra() {
        for s in [SIGMA_X, SIGMA_Y, SIGMA_Z] {
            assert!((s * s).max_abs_diff(&IDENTITY) < 1e-15);
            assert!(s.max_abs_diff(&s.dagger()) < 1e-15);
            assert_eq!(s.trace(), c(0.0, 0.0));
        }
        assert!((SIGMA_X * SIGMA_Y).max_abs_diff(&SIGMA_Z.scale(I_UNIT)) < 1e-15);
        assert!((SIGMA_Y * SIGMA_Z).max_abs_diff(&SIGMA_X.scale(I_UNIT)) < 1e-15);
        assert!((SIGMA_Z * SIGMA_X).max_abs_diff(&SIGMA_Y.scale(I_UNIT)) < 1e-15);
    }

    #[test]
    fn rotation_matches_series() {
        // exp(-i θ/2 σx) = cos(θ/2) I - i sin(θ/2) σx
        let theta = 0.731;
        let expected = IDENTITY.scale_re((theta / 2.0).cos())
            - SIGMA_X.scale(I_UNIT * (theta / 2.0).sin());
        let got = Mat2::su2_rotation(theta, [1.0, 0.0, 0.0]);
        assert!(got.max_abs_diff(&expected) < 1e-15);
        let u = Mat2::exp_i_pauli([0.3, -0.2, 0.9]);
        assert!((u.dagger() * u).max_abs_diff(&IDENTITY) < 1e-14);
    }
}
