//! Density matrices of a single spin.

use num_traits::Float;

use crate::linalg::{Mat2, C64};
use crate::{Error, Result};

pub const STATE_TOLERANCE: f64 = 1e-10;

/// A validated 2×2 density matrix. Basis order is `(|↑⟩, |↓⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Mat2,
}

impl QubitState {
    pub fn down() -> Self {
        QubitState { rho: Mat2::diag(C64::new(0.0, 0.0), C64::new(1.0, 0.0)) }
    }

    pub fn up() -> Self {
        QubitState { rho: Mat2::diag(C64::new(1.0, 0.0), C64::new(0.0, 0.0)) }
    }

    pub fn maximally_mixed() -> Self {
        QubitState { rho: Mat2::diag(C64::new(0.5, 0.0), C64::new(0.5, 0.0)) }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalised) ket.
    pub fn pure(ket: [C64; 2]) -> Result<Self> {
        let norm = ket[0].norm_sqr() + ket[1].norm_sqr();
        if norm <= 0.0 {
            return Err(Error::InvalidState("zero ket"));
        }
        let rho = Mat2::new(
            ket[0] * ket[0].conj(),
            ket[0] * ket[1].conj(),
            ket[1] * ket[0].conj(),
            ket[1] * ket[1].conj(),
        )
        .scale_re(1.0 / norm);
        Ok(QubitState { rho })
    }

    pub fn from_matrix(rho: Mat2) -> Result<Self> {
        let state = QubitState { rho };
        state.validate()?;
        Ok(state)
    }

    #[cfg(test)]
    pub(crate) fn from_matrix_unchecked(rho: Mat2) -> Self {
        QubitState { rho }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.rho
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.rho;
        if m.max_abs_diff(&m.dagger()) >= STATE_TOLERANCE {
            return Err(Error::InvalidState("not hermitian"));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() >= STATE_TOLERANCE || tr.im.abs() >= STATE_TOLERANCE {
            return Err(Error::InvalidState("trace differs from one"));
        }
        if self.min_eigenvalue() < -STATE_TOLERANCE {
            return Err(Error::InvalidState("negative eigenvalue"));
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.rho.0;
        let (a, d) = (m[0][0].re, m[1][1].re);
        let b = m[0][1];
        let disc = ((a - d) * (a - d) + 4.0 * b.norm_sqr()).sqrt();
        ((a + d - disc) / 2.0, (a + d + disc) / 2.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    /// Population of `|↑⟩`.
    pub fn p_up(&self) -> f64 {
        self.rho.0[0][0].re
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.rho.0;
        [2.0 * m[1][0].re, 2.0 * m[1][0].im, m[0][0].re - m[1][1].re]
    }

    /// Unitary evolution `U ρ U†`.
    pub fn evolve(&self, u: &Mat2) -> QubitState {
        QubitState { rho: u.conjugate(&self.rho) }
    }

    /// Depolarising channel `ρ → (1 − p) ρ + p I/2`.
    pub fn depolarize(&self, p: f64) -> Result<QubitState> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain { name: "depolarizing probability", value: p });
        }
        Ok(self.depolarize_unchecked(p))
    }

    pub(crate) fn depolarize_unchecked(&self, p: f64) -> QubitState {
        if p == 0.0 {
            return *self;
        }
        let mixed = Mat2::diag(C64::new(0.5 * p, 0.0), C64::new(0.5 * p, 0.0));
        QubitState { rho: self.rho.scale_re(1.0 - p) + mixed }
    }

    /// Multiply the coherences by `factor`.
    pub fn dephase(&self, factor: f64) -> QubitState {
        let mut rho = self.rho;
        rho.0[0][1] = rho.0[0][1] * factor;
        rho.0[1][0] = rho.0[1][0] * factor;
        QubitState { rho }
    }
}

/// Depolarising channel, as a free function.
pub fn apply_depolarizing(state: &QubitState, p: f64) -> Result<QubitState> {
    state.depolarize(p)
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
///
/// For 2×2 density matrices this equals `tr(ρσ) + 2 √(det ρ · det σ)`, which
/// is what is evaluated. For a pure `ideal = |ψ⟩⟨ψ|` it is `⟨ψ|ρ|ψ⟩`.
pub fn state_fidelity(actual: &QubitState, ideal: &QubitState) -> Result<f64> {
    actual.validate()?;
    ideal.validate()?;
    let overlap = (*actual.matrix() * *ideal.matrix()).trace().re;
    let dets = actual.matrix().det().re.max(0.0) * ideal.matrix().det().re.max(0.0);
    Ok((overlap + 2.0 * dets.sqrt()).clamp(0.0, 1.0))
}
