//! Rotating-frame spin dynamics under shaped pulses.
//!
//! The Hamiltonian during a pulse is
//! `H(t) = 2π [Δ σz/2 + Ω(t) (cos φ σx + sin φ σy)/2]` (frequencies in Hz).
//! Shaped pulses are integrated with piecewise-constant slices whose rotation
//! never exceeds [`MAX_SLICE_ROTATION`]; each slice generator is a
//! fourth-order Magnus step. Constant envelopes are propagated in one exact
//! step.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::clifford::PhysicalGate;
use crate::linalg::{Mat2, IDENTITY};
use crate::pulse::{PulseSettings, PulseSpec};
use crate::state::QubitState;
use crate::{Error, Result};

/// Upper bound on the rotation angle of one integration slice, radians.
pub const MAX_SLICE_ROTATION: f64 = 0.01;
/// Baseband generator time resolution, seconds.
pub const DEFAULT_TIME_QUANTUM: f64 = 20e-9;
/// Electron resonance linewidth (FWHM), Hz.
pub const DEFAULT_LINEWIDTH_FWHM: f64 = 1.8e3;

/// Standard deviation of a Gaussian with the given full width at half maximum.
pub fn sigma_from_fwhm(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * core::f64::consts::LN_2).sqrt())
}

/// Gaussian detuning spread that produces a coherence decay
/// `exp(-(t/T2*)²)` during free precession.
pub fn sigma_from_t2_star(t2_star: f64) -> f64 {
    core::f64::consts::SQRT_2 / (2.0 * PI * t2_star)
}

/// Physical error knobs. Quasi-static terms are drawn once per shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    /// Detuning standard deviation, Hz.
    pub detuning_sigma: f64,
    /// Relative Rabi-amplitude standard deviation.
    pub amplitude_error_sigma: f64,
    /// Pulse durations are rounded to this grid, seconds. 0 disables.
    pub time_quantum: f64,
    /// Depolarising probability after each random or recovery Clifford.
    pub depolarizing_per_clifford: f64,
    /// Depolarising probability after each interleaved gate.
    pub depolarizing_interleaved: f64,
    /// Exponential coherence decay time during idle periods, seconds.
    /// `None` disables.
    pub t2_star: Option<f64>,
    /// Idle time after each Clifford, seconds.
    pub idle_time: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::ideal()
    }
}

impl NoiseModel {
    pub const fn ideal() -> Self {
        NoiseModel {
            detuning_sigma: 0.0,
            amplitude_error_sigma: 0.0,
            time_quantum: 0.0,
            depolarizing_per_clifford: 0.0,
            depolarizing_interleaved: 0.0,
            t2_star: None,
            idle_time: 0.0,
        }
    }

    /// 20 ns timing grid and a 1.8 kHz linewidth.
    pub fn hardware_default() -> Self {
        NoiseModel {
            detuning_sigma: sigma_from_fwhm(DEFAULT_LINEWIDTH_FWHM),
            time_quantum: DEFAULT_TIME_QUANTUM,
            ..NoiseModel::ideal()
        }
    }

    pub fn depolarizing(p: f64) -> Self {
        NoiseModel { depolarizing_per_clifford: p, ..NoiseModel::ideal() }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("detuning_sigma", self.detuning_sigma),
            ("amplitude_error_sigma", self.amplitude_error_sigma),
            ("time_quantum", self.time_quantum),
            ("idle_time", self.idle_time),
        ];
        for (name, value) in nonneg {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Domain { name, value });
            }
        }
        for (name, value) in [
            ("depolarizing_per_clifford", self.depolarizing_per_clifford),
            ("depolarizing_interleaved", self.depolarizing_interleaved),
        ] {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::Domain { name, value });
            }
        }
        if let Some(t2) = self.t2_star {
            if !(t2 > 0.0) {
                return Err(Error::Domain { name: "t2_star", value: t2 });
            }
        }
        Ok(())
    }

    /// Whether a shot draws any random physical parameter.
    pub fn is_stochastic(&self) -> bool {
        self.detuning_sigma > 0.0 || self.amplitude_error_sigma > 0.0
    }

    /// Coherence factor and precession angle accumulated in one idle period.
    fn idle_evolution(&self, draw: &ShotNoise) -> Option<(f64, Mat2)> {
        if self.idle_time <= 0.0 {
            return None;
        }
        let factor = self.t2_star.map_or(1.0, |t2| (-self.idle_time / t2).exp());
        let precession = Mat2::su2_rotation(2.0 * PI * draw.detuning * self.idle_time, [0.0, 0.0, 1.0]);
        Some((factor, precession))
    }
}

/// One realisation of the quasi-static noise, fixed for a whole shot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShotNoise {
    /// Hz, added to every pulse's detuning.
    pub detuning: f64,
    /// Relative Rabi amplitude error.
    pub amplitude_error: f64,
}

impl ShotNoise {
    pub const NONE: ShotNoise = ShotNoise { detuning: 0.0, amplitude_error: 0.0 };

    /// Always consumes two normal deviates so the random stream layout does not
    /// depend on the noise settings.
    pub fn draw<R: Rng + ?Sized>(noise: &NoiseModel, rng: &mut R) -> ShotNoise {
        let zd: f64 = rng.sample(StandardNormal);
        let za: f64 = rng.sample(StandardNormal);
        ShotNoise {
            detuning: noise.detuning_sigma * zd,
            amplitude_error: noise.amplitude_error_sigma * za,
        }
    }
}

/// Constants of the donor device, used for configuration defaults only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Electron gyromagnetic ratio, Hz/T.
    pub gamma_e: f64,
    /// Nuclear gyromagnetic ratio, Hz/T.
    pub gamma_n: f64,
    /// Hyperfine coupling, Hz.
    pub hyperfine_a: f64,
    /// Static field, T.
    pub b0: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams { gamma_e: 27.97e9, gamma_n: 17.23e6, hyperfine_a: 96.9e6, b0: 1.5 }
    }
}

impl DeviceParams {
    /// Upper electron resonance `γe B0 + A/2`.
    pub fn electron_frequency(&self) -> f64 {
        self.gamma_e * self.b0 + self.hyperfine_a / 2.0
    }

    /// Ionised-donor nuclear resonance `γn B0`.
    pub fn nuclear_frequency(&self) -> f64 {
        self.gamma_n * self.b0
    }
}

/// Round `duration` to the nearest multiple of `quantum`, halves rounding up.
pub fn quantize_duration(duration: f64, quantum: f64) -> f64 {
    if quantum <= 0.0 {
        return duration;
    }
    // The guard absorbs representation error in ratios like 0.25e-6 / 20e-9.
    let steps = (duration / quantum + 0.5 + 1e-9).floor();
    steps * quantum
}

/// Propagator of one pulse with the default slice bound.
pub fn pulse_propagator(pulse: &PulseSpec, noise: &NoiseModel, draw: &ShotNoise) -> Result<Mat2> {
    pulse_propagator_with(pulse, noise, draw, MAX_SLICE_ROTATION)
}

pub fn pulse_propagator_with(
    pulse: &PulseSpec,
    noise: &NoiseModel,
    draw: &ShotNoise,
    max_slice_rotation: f64,
) -> Result<Mat2> {
    if !(pulse.pi_pulse_duration > 0.0) {
        return Err(Error::Domain { name: "pi_pulse_duration", value: pulse.pi_pulse_duration });
    }
    if pulse.rotation_angle == 0.0 {
        return Ok(IDENTITY);
    }
    let duration = quantize_duration(pulse.nominal_duration(), noise.time_quantum);
    if !(duration > 0.0) {
        return Err(Error::Domain { name: "quantized pulse duration", value: duration });
    }
    let peak = pulse.peak_rabi_frequency() * (1.0 + draw.amplitude_error);
    let detuning = pulse.detuning + draw.detuning;
    let (sin_phi, cos_phi) = pulse.phase.sin_cos();

    // exp(-i 2π dt (Δ σz + Ω n·σ)/2) = exp(-i (π dt)(Ω cos φ, Ω sin φ, Δ)·σ)
    let slice = |omega: f64, dt: f64| {
        let k = PI * dt;
        Mat2::exp_i_pauli([k * omega * cos_phi, k * omega * sin_phi, k * detuning])
    };

    if pulse.shape.is_constant() {
        return Ok(slice(peak, duration));
    }

    let total_rotation = 2.0 * PI * (peak * peak + detuning * detuning).sqrt() * duration;
    let slices = ((total_rotation / max_slice_rotation).ceil() as usize).max(1);
    let dt = duration / slices as f64;
    // Generator of each slice: fourth-order Magnus step on the two Gauss
    // points, w = (h/2)(v1 + v2) + (√3 h²/6)(v2 × v1), with H(t) = v(t)·σ.
    let gauss = 3f64.sqrt() / 6.0;
    let field = |x: f64| {
        let omega = peak * pulse.shape.envelope(x);
        [PI * omega * cos_phi, PI * omega * sin_phi, PI * detuning]
    };
    let mut u = IDENTITY;
    for j in 0..slices {
        let v1 = field((j as f64 + 0.5 - gauss) / slices as f64);
        let v2 = field((j as f64 + 0.5 + gauss) / slices as f64);
        let cross = [
            v2[1] * v1[2] - v2[2] * v1[1],
            v2[2] * v1[0] - v2[0] * v1[2],
            v2[0] * v1[1] - v2[1] * v1[0],
        ];
        let c = 3f64.sqrt() * dt * dt / 6.0;
        let w = [
            0.5 * dt * (v1[0] + v2[0]) + c * cross[0],
            0.5 * dt * (v1[1] + v2[1]) + c * cross[1],
            0.5 * dt * (v1[2] + v2[2]) + c * cross[2],
        ];
        u = Mat2::exp_i_pauli(w) * u;
    }
    Ok(u)
}

/// Evolve `state` through one pulse.
pub fn apply_pulse(
    state: &QubitState,
    pulse: &PulseSpec,
    noise: &NoiseModel,
    draw: &ShotNoise,
) -> Result<QubitState> {
    state.validate()?;
    let u = pulse_propagator(pulse, noise, draw)?;
    Ok(state.evolve(&u))
}

/// `exp(-i φ σz / 2)`.
fn frame_rotation(phi: f64) -> Mat2 {
    Mat2::su2_rotation(phi, [0.0, 0.0, 1.0])
}

/// Per-shot propagators for every physical gate.
///
/// Only the x-axis π and π/2 pulses are integrated; the other phases follow by
/// conjugation with a σz frame rotation, which commutes with the detuning term.
#[derive(Debug, Clone, Copy)]
pub struct GatePropagators {
    table: [Mat2; 7],
}

impl GatePropagators {
    pub fn new(pulse: &PulseSettings, noise: &NoiseModel, draw: &ShotNoise) -> Result<Self> {
        let pi = pulse.pi_pulse();
        let full = pulse_propagator(&pi, noise, draw)?;
        let half = pulse_propagator(&pi.with_rotation(PI / 2.0), noise, draw)?;
        let mut table = [IDENTITY; 7];
        for (slot, gate) in PhysicalGate::ALL.iter().enumerate() {
            if let Some((phase, angle)) = gate.pulse_parameters() {
                let base = if angle > PI * 0.75 { full } else { half };
                let frame = frame_rotation(phase);
                table[slot] = frame * base * frame.dagger();
            }
        }
        Ok(GatePropagators { table })
    }

    /// Exact gate unitaries, as realised by perfect pulses.
    pub fn ideal() -> Self {
        let mut table = [IDENTITY; 7];
        for (slot, gate) in PhysicalGate::ALL.iter().enumerate() {
            table[slot] = gate.unitary();
        }
        GatePropagators { table }
    }

    pub fn get(&self, gate: PhysicalGate) -> &Mat2 {
        let slot = PhysicalGate::ALL.iter().position(|g| *g == gate).unwrap_or(0);
        &self.table[slot]
    }

    /// Product of the gates in application order.
    pub fn sequence(&self, gates: &[PhysicalGate]) -> Mat2 {
        gates.iter().fold(IDENTITY, |acc, g| *self.get(*g) * acc)
    }

    pub(crate) fn idle(noise: &NoiseModel, draw: &ShotNoise) -> Option<(f64, Mat2)> {
        noise.idle_evolution(draw)
    }
}

/// `P↑` after a noiseless π pulse on `|↓⟩`, for each detuning (Hz).
pub fn excitation_profile(pulse: &PulseSpec, detunings: &[f64]) -> Result<Vec<f64>> {
    let noise = NoiseModel::ideal();
    let pi = pulse.with_rotation(PI);
    detunings
        .iter()
        .map(|&d| {
            let state = apply_pulse(&QubitState::down(), &pi.with_detuning(d), &noise, &ShotNoise::NONE)?;
            Ok(state.p_up())
        })
        .collect()
}

/// Full width at half maximum of the excitation profile, Hz.
///
/// Searches outward from resonance for the first point where `P↑` falls to
/// half its on-resonance value, then refines by bisection.
pub fn excitation_fwhm(pulse: &PulseSpec) -> Result<f64> {
    let p_at = |d: f64| -> Result<f64> { Ok(excitation_profile(pulse, &[d])?[0]) };
    let half = p_at(0.0)? / 2.0;
    let step = 0.01 / pulse.pi_pulse_duration;
    let mut lo = 0.0;
    let mut hi = step;
    let mut guard = 0;
    while p_at(hi)? > half {
        lo = hi;
        hi += step;
        guard += 1;
        if guard > 100_000 {
            return Err(Error::InsufficientData("excitation profile never reaches half maximum"));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if p_at(mid)? > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + hi)
}
