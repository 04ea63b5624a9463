//! Fidelity as a function of π-pulse duration and shape.

use rbench_core::analysis::{Estimate, FitResult};
use rbench_core::pulse::{PulseSettings, PulseShape};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ModeArg};
use crate::error::{AppError, ExitCode};
use crate::parallel;
use crate::report::{fit_dataset, resolve_mode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub p: Estimate,
    pub clifford_fidelity: Estimate,
    pub single_gate_fidelity: Estimate,
    pub converged: bool,
}

impl From<&FitResult> for FitSummary {
    fn from(fit: &FitResult) -> Self {
        FitSummary {
            p: fit.p,
            clifford_fidelity: fit.clifford_fidelity,
            single_gate_fidelity: fit.single_gate_fidelity,
            converged: fit.diagnostics.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    /// `config`, `fit`, `invariant` or `failure`.
    pub kind: String,
    pub message: String,
}

impl From<&AppError> for PointError {
    fn from(e: &AppError) -> Self {
        let kind = match e.exit_code() {
            ExitCode::Config => "config",
            ExitCode::Fit => "fit",
            ExitCode::Invariant => "invariant",
            ExitCode::Success | ExitCode::Failure => "failure",
        };
        PointError { kind: kind.to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub pi_duration: f64,
    pub shape: PulseShape,
    pub fit: Option<FitSummary>,
    pub error: Option<PointError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Run and fit the experiment once per sweep point. Every point uses the
/// same seed; failures are recorded in place.
pub fn run_sweep(config: &ExperimentConfig) -> SweepResult {
    let rows = config
        .sweep
        .iter()
        .map(|point| {
            log::info!("sweep point {} s, {}", point.pi_duration, point.shape.label());
            let mut rb = config.rb_config();
            rb.pulse = PulseSettings { shape: point.shape, pi_duration: point.pi_duration };
            let outcome = parallel::run_experiment(&rb).and_then(|data| {
                let mode = resolve_mode(&data, ModeArg::from(config.report.fit_mode))?;
                fit_dataset(&data, mode)
            });
            let (fit, error) = match outcome {
                Ok((_, fit)) => (Some(FitSummary::from(&fit)), None),
                Err(e) => (None, Some(PointError::from(&e))),
            };
            SweepRow { pi_duration: point.pi_duration, shape: point.shape, fit, error }
        })
        .collect();
    SweepResult { rows }
}

impl SweepResult {
    pub fn row(&self, shape: PulseShape, pi_duration: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.shape == shape && r.pi_duration == pi_duration)
    }
}
