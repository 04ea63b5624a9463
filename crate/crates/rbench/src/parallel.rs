//! Multi-threaded execution with results identical to the serial path.

use rayon::prelude::*;
use rbench_core::analysis::{bootstrap_resample, fit_decay, percentile_interval, AggregatedDecay, BootstrapInterval, FitMode};
use rbench_core::protocol::{ExperimentRunner, RbConfig, RbDataset};
use rbench_core::Error as CoreError;

use crate::error::{AppError, Result};

/// Run `f` on a pool with `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| AppError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Simulate every record of `config` in parallel. Each record draws from its
/// own random streams, so the dataset does not depend on scheduling.
pub fn run_experiment(config: &RbConfig) -> Result<RbDataset> {
    let runner = ExperimentRunner::new(config.clone())?;
    let records = runner
        .jobs()
        .into_par_iter()
        .map(|(n, k)| runner.run_record(n, k))
        .collect::<Result<Vec<_>, CoreError>>()?;
    Ok(runner.assemble(records))
}

/// Residual bootstrap with resamples spread over the pool.
pub fn bootstrap_ci(agg: &AggregatedDecay, mode: FitMode, n_resamples: usize, seed: u64) -> Result<BootstrapInterval> {
    if n_resamples == 0 {
        return Err(CoreError::InsufficientData("at least one bootstrap resample is needed").into());
    }
    let primary = fit_decay(agg, mode)?;
    let values: Vec<_> =
        (0..n_resamples).into_par_iter().map(|b| bootstrap_resample(agg, mode, &primary, seed, b)).collect();
    Ok(percentile_interval(&values, primary.p.value)?)
}
