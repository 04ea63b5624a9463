//! Pulse envelopes and their calibration.

use core::f64::consts::PI;

use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Half-width of the truncated sinc in radians of its argument.
pub const SINC_HALF_WIDTH: f64 = 3.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    Square,
    /// `sin(u)/u` on `u ∈ [-3π, 3π]`.
    #[serde(rename = "sinc3")]
    Sinc3,
}

impl PulseShape {
    /// Envelope at fractional time `x ∈ [0, 1]` through the pulse.
    pub fn envelope(self, x: f64) -> f64 {
        match self {
            PulseShape::Square => 1.0,
            PulseShape::Sinc3 => sinc(SINC_HALF_WIDTH * (2.0 * x - 1.0)),
        }
    }

    pub fn is_constant(self) -> bool {
        matches!(self, PulseShape::Square)
    }

    /// Time average of the envelope over the pulse, `∫₀¹ envelope(x) dx`.
    pub fn mean_envelope(self) -> f64 {
        match self {
            PulseShape::Square => 1.0,
            PulseShape::Sinc3 => gauss_legendre(|x| self.envelope(x), 0.0, 1.0, 256),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PulseShape::Square => "square",
            PulseShape::Sinc3 => "sinc3",
        }
    }
}

pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss-Legendre rule with `panels` equal panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        let half = h / 2.0;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            total += w * (f(mid - half * x) + f(mid + half * x));
        }
    }
    total * h / 2.0
}

/// One resonant drive pulse in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// Drive phase in radians: 0 drives about x, π/2 about y.
    pub phase: f64,
    /// Target rotation angle in radians.
    pub rotation_angle: f64,
    /// Duration of a π rotation with this shape and peak power, seconds.
    pub pi_pulse_duration: f64,
    /// Drive frequency minus qubit frequency, Hz.
    pub detuning: f64,
}

impl PulseSpec {
    pub fn pi_pulse(shape: PulseShape, pi_pulse_duration: f64) -> Self {
        PulseSpec { shape, phase: 0.0, rotation_angle: PI, pi_pulse_duration, detuning: 0.0 }
    }

    pub fn with_phase(self, phase: f64) -> Self {
        PulseSpec { phase, ..self }
    }

    pub fn with_rotation(self, rotation_angle: f64) -> Self {
        PulseSpec { rotation_angle, ..self }
    }

    pub fn with_detuning(self, detuning: f64) -> Self {
        PulseSpec { detuning, ..self }
    }

    /// Duration before quantisation. Smaller rotations compress the envelope
    /// in time at fixed peak amplitude.
    pub fn nominal_duration(&self) -> f64 {
        self.pi_pulse_duration * self.rotation_angle / PI
    }

    /// Peak Rabi frequency in Hz such that a noiseless on-resonance pulse of
    /// the nominal duration rotates by `rotation_angle`.
    pub fn peak_rabi_frequency(&self) -> f64 {
        1.0 / (2.0 * self.pi_pulse_duration * self.shape.mean_envelope())
    }
}

/// Shape and π duration, as configured for an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSettings {
    pub shape: PulseShape,
    /// Seconds.
    pub pi_duration: f64,
}

impl PulseSettings {
    pub fn pi_pulse(&self) -> PulseSpec {
        PulseSpec::pi_pulse(self.shape, self.pi_duration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelopes_bounded() {
        for shape in [PulseShape::Square, PulseShape::Sinc3] {
            for i in 0..=1000 {
                let v = shape.envelope(i as f64 / 1000.0);
                assert!(v.abs() <= 1.0 + 1e-15);
            }
        }
        assert_eq!(PulseShape::Sinc3.envelope(0.5), 1.0);
        assert!(PulseShape::Sinc3.envelope(0.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_polynomial() {
        let v = gauss_legendre(|x| x.powi(7) - 2.0 * x, 0.0, 2.0, 1);
        assert!((v - (2f64.powi(8) / 8.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn half_pulse_same_peak() {
        let pi = PulseSpec::pi_pulse(PulseShape::Sinc3, 4.5e-6);
        let half = pi.with_rotation(PI / 2.0);
        assert_eq!(pi.peak_rabi_frequency(), half.peak_rabi_frequency());
        assert!((half.nominal_duration() - 2.25e-6).abs() < 1e-18);
    }
}
