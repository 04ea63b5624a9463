//! Single-qubit randomized benchmarking, from pulses to fidelities.
//!
//! This crate is `no_std` (it needs `alloc`). It contains everything that is
//! pure computation:
//!
//! - [`clifford`]: the 24-element single-qubit Clifford group built from the
//!   physical gate alphabet `{I, X, Y, ±X/2, ±Y/2}`, composition and
//!   recovery-gate solving.
//! - [`dynamics`]: rotating-frame evolution of a spin-1/2 density matrix under
//!   square or sinc-shaped resonant pulses with quasi-static noise.
//! - [`protocol`]: reference and interleaved benchmarking sequences, shot
//!   simulation through a SPAM model, and dataset assembly.
//! - [`analysis`]: aggregation, weighted exponential-decay fits, confidence
//!   intervals and the fidelity conversions.
//!
//! File formats, parallel execution and the command line live in the `rbench`
//! crate.
#![no_std]
// When std is anywhere in the build graph its inherent float methods shadow
// `num_traits::Float`, which then reads as an unused import.
#![allow(unused_imports)]

extern crate alloc;

pub mod analysis;
pub mod clifford;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod pulse;
pub mod rng;
pub mod state;

pub use error::{Error, Result};
