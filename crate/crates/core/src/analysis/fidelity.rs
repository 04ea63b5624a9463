use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{FitResult, Interval};
use crate::clifford::MEAN_GATES_PER_CLIFFORD;
use crate::{Error, Result};

fn check_decay(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { name, value: p })
    }
}

/// `F_c = (1 + p_c)/2`.
pub fn clifford_fidelity(p_c: f64) -> Result<f64> {
    check_decay("p_c", p_c)?;
    Ok((1.0 + p_c) / 2.0)
}

/// `F = 1 − (1 − F_c)/1.875`.
pub fn single_gate_fidelity(f_c: f64) -> Result<f64> {
    if !(f_c > 0.5 && f_c <= 1.0) {
        return Err(Error::Domain { name: "F_c", value: f_c });
    }
    Ok(1.0 - (1.0 - f_c) / MEAN_GATES_PER_CLIFFORD)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterleavedFidelity {
    /// `p_gate / p_c`.
    pub ratio: f64,
    /// `(1 + p_gate/p_c)/2`, not clipped.
    pub fidelity: f64,
    pub ci: Option<Interval>,
    /// Set when the point estimate exceeds 1.
    pub above_one: bool,
}

/// `F_gate = (1 + p_gate/p_c)/2`.
pub fn interleaved_fidelity(p_gate: f64, p_c: f64) -> Result<InterleavedFidelity> {
    check_decay("p_c", p_c)?;
    check_decay("p_gate", p_gate)?;
    let ratio = p_gate / p_c;
    let fidelity = (1.0 + ratio) / 2.0;
    Ok(InterleavedFidelity { ratio, fidelity, ci: None, above_one: fidelity > 1.0 })
}

/// Interleaved fidelity with the relative 95 % half-widths of `p_gate` and
/// `p_c` added in quadrature.
pub fn interleaved_ci(fit_ref: &FitResult, fit_gate: &FitResult) -> Result<InterleavedFidelity> {
    let rel_gate = fit_gate.p.relative_half_width().ok_or(Error::MissingInterval)?;
    let rel_ref = fit_ref.p.relative_half_width().ok_or(Error::MissingInterval)?;
    let mut out = interleaved_fidelity(fit_gate.p.value, fit_ref.p.value)?;
    let rel = (rel_gate * rel_gate + rel_ref * rel_ref).sqrt();
    let half = out.ratio * rel;
    out.ci = Some(Interval { lo: (1.0 + out.ratio - half) / 2.0, hi: (1.0 + out.ratio + half) / 2.0 });
    Ok(out)
}
