//! Residual bootstrap for the decay parameter.

use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fit::fit_arrays;
use super::{AggregatedDecay, FitMode, FitResult};
use crate::rng::{self, DOMAIN_BOOTSTRAP};
use crate::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub lo: f64,
    pub hi: f64,
    pub resamples: usize,
    pub failed: usize,
    /// Fewer than two successful resamples: the interval is a single point.
    pub degenerate: bool,
}

struct Prepared {
    n: Vec<f64>,
    w: Vec<f64>,
    fitted: Vec<f64>,
    weighted_residuals: Vec<f64>,
    uniform: bool,
}

fn prepare(agg: &AggregatedDecay, primary: &FitResult) -> Prepared {
    let weights = agg.weights();
    let mut order: Vec<usize> = (0..agg.points.len()).collect();
    order.sort_by_key(|&i| agg.points[i].n);
    let n: Vec<f64> = order.iter().map(|&i| f64::from(agg.points[i].n)).collect();
    let w: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
    let fitted: Vec<f64> = order.iter().map(|&i| primary.model(agg.points[i].n)).collect();
    let weighted_residuals = order
        .iter()
        .enumerate()
        .map(|(j, &i)| w[j].sqrt() * (agg.points[i].mean - fitted[j]))
        .collect();
    Prepared { n, w, fitted, weighted_residuals, uniform: agg.uniform_weights }
}

fn refit(prep: &Prepared, mode: FitMode, seed: u64, index: usize) -> Result<f64> {
    let mut rng = rng::stream(seed, &[DOMAIN_BOOTSTRAP, index as u64]);
    let m = prep.n.len();
    let y: Vec<f64> = (0..m)
        .map(|i| {
            let e = prep.weighted_residuals[rng.random_range(0..m)];
            prep.fitted[i] + e / prep.w[i].sqrt()
        })
        .collect();
    match fit_arrays(&prep.n, &y, &prep.w, mode, prep.uniform) {
        Ok(fit) => Ok(fit.p.value),
        // Resampling exact-fit residuals reproduces the fitted curve itself.
        Err(Error::DegenerateData(_)) if prep.weighted_residuals.iter().all(|e| *e == 0.0) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

/// Fitted `p` of one residual-bootstrap resample. Resample `index` always uses
/// the same random stream, so resamples may be evaluated in any order.
pub fn bootstrap_resample(
    agg: &AggregatedDecay,
    mode: FitMode,
    primary: &FitResult,
    seed: u64,
    index: usize,
) -> Result<f64> {
    refit(&prepare(agg, primary), mode, seed, index)
}

/// Collect resampled `p` values into the 2.5/97.5 percentile interval.
pub fn percentile_interval(values: &[Result<f64>], primary_p: f64) -> Result<BootstrapInterval> {
    let total = values.len();
    let failed = values.iter().filter(|v| v.is_err()).count();
    if failed * 10 > total {
        return Err(Error::BootstrapDiverged { failed, total });
    }
    let mut ok: Vec<f64> = values
        .iter()
        .filter_map(|v| v.as_ref().ok().copied())
        .map(|p| if p.is_nan() { primary_p } else { p })
        .collect();
    if ok.is_empty() {
        return Err(Error::BootstrapDiverged { failed, total });
    }
    ok.sort_by(f64::total_cmp);
    let quantile = |q: f64| {
        let h = (ok.len() - 1) as f64 * q;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(ok.len() - 1);
        ok[lo] + (h - lo as f64) * (ok[hi] - ok[lo])
    };
    Ok(BootstrapInterval {
        lo: quantile(0.025),
        hi: quantile(0.975),
        resamples: total,
        failed,
        degenerate: ok.len() < 2,
    })
}

/// Residual bootstrap: resample the weighted residuals with replacement, add
/// them back to the fitted curve, refit, and take percentiles of `p`.
pub fn bootstrap_ci(
    agg: &AggregatedDecay,
    mode: FitMode,
    n_resamples: usize,
    seed: u64,
) -> Result<BootstrapInterval> {
    if n_resamples == 0 {
        return Err(Error::InsufficientData("at least one bootstrap resample is needed"));
    }
    let primary = super::fit_decay(agg, mode)?;
    let prep = prepare(agg, &primary);
    let values: Vec<Result<f64>> = (0..n_resamples).map(|b| refit(&prep, mode, seed, b)).collect();
    percentile_interval(&values, primary.p.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{fit_decay, DecayPoint};
    use crate::protocol::ELECTRON_LENGTHS;

    fn exact() -> AggregatedDecay {
        AggregatedDecay::from_points(
            ELECTRON_LENGTHS
                .iter()
                .map(|&n| DecayPoint { n, mean: 0.5 + 0.45 * 0.99f64.powi(n as i32), variance: 1e-3, count: 15 })
                .collect(),
        )
    }

    #[test]
    fn zero_residuals_zero_width() {
        let b = bootstrap_ci(&exact(), FitMode::CombinedHalf, 50, 1).unwrap();
        assert!(b.hi - b.lo < 1e-9);
        assert!(!b.degenerate);
    }

    #[test]
    fn single_resample_is_degenerate() {
        let b = bootstrap_ci(&exact(), FitMode::CombinedHalf, 1, 1).unwrap();
        assert!(b.degenerate);
        assert_eq!(b.lo, b.hi);
    }

    #[test]
    fn noisy_interval_brackets_estimate() {
        let mut agg = exact();
        let wiggle = [0.004, -0.003, 0.002, -0.005, 0.001, 0.003, -0.002, 0.004, -0.001, 0.002];
        for (p, d) in agg.points.iter_mut().zip(wiggle) {
            p.mean += d;
        }
        let fit = fit_decay(&agg, FitMode::CombinedHalf).unwrap();
        let b = bootstrap_ci(&agg, FitMode::CombinedHalf, 400, 7).unwrap();
        assert!(b.lo < fit.p.value && fit.p.value < b.hi);
        let again = bootstrap_ci(&agg, FitMode::CombinedHalf, 400, 7).unwrap();
        assert_eq!(b, again);
        let one = bootstrap_resample(&agg, FitMode::CombinedHalf, &fit, 7, 3).unwrap();
        assert!(one > 0.9 && one <= 1.0);
    }

    #[test]
    fn diverging_resamples_fail() {
        let values: Vec<Result<f64>> =
            (0..10).map(|i| if i < 2 { Err(Error::NonConvergence { iterations: 500 }) } else { Ok(0.99) }).collect();
        assert!(matches!(percentile_interval(&values, 0.99), Err(Error::BootstrapDiverged { failed: 2, total: 10 })));
    }
}
