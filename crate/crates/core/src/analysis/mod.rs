//! Decay fitting and fidelity extraction.

mod aggregate;
mod bootstrap;
mod fidelity;
mod fit;
pub mod stats;

pub use aggregate::{aggregate, aggregate_target, estimate_asymptote, AggregatedDecay, DecayPoint};
pub use bootstrap::{bootstrap_ci, bootstrap_resample, percentile_interval, BootstrapInterval, DEFAULT_RESAMPLES};
pub use fidelity::{
    clifford_fidelity, interleaved_ci, interleaved_fidelity, single_gate_fidelity, InterleavedFidelity,
};
pub use fit::{fit_decay, Estimate, FitDiagnostics, FitMode, FitResult, Interval, CONFIDENCE_LEVEL};
