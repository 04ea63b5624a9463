use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::FitMode;
use crate::clifford::Target;
use crate::protocol::{RbDataset, RbRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: u32,
    /// Mean over sequences of the per-sequence value.
    pub mean: f64,
    /// Unbiased sample variance of the per-sequence values (0 when K < 2).
    pub variance: f64,
    pub count: usize,
}

impl DecayPoint {
    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        (self.variance / self.count as f64).sqrt()
    }
}

/// Per-length means and variances, ready for fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedDecay {
    pub points: Vec<DecayPoint>,
    /// Set when some length had fewer than two sequences; fits then weight all
    /// points equally.
    pub uniform_weights: bool,
}

impl AggregatedDecay {
    pub fn from_points(points: Vec<DecayPoint>) -> Self {
        let uniform_weights = points.iter().any(|p| p.count < 2);
        AggregatedDecay { points, uniform_weights }
    }

    /// Same points with every variance scaled.
    pub fn with_variance_scale(&self, factor: f64) -> Self {
        let points = self.points.iter().map(|p| DecayPoint { variance: p.variance * factor, ..*p }).collect();
        AggregatedDecay { points, uniform_weights: self.uniform_weights }
    }

    /// Fit weights `1/variance`; zero variances get the largest finite weight
    /// present, and uniform weighting is used when flagged or when no variance
    /// is positive.
    pub fn weights(&self) -> Vec<f64> {
        let max_finite = self
            .points
            .iter()
            .filter(|p| p.variance > 0.0)
            .map(|p| 1.0 / p.variance)
            .fold(f64::NAN, f64::max);
        if self.uniform_weights || max_finite.is_nan() {
            return alloc::vec![1.0; self.points.len()];
        }
        self.points
            .iter()
            .map(|p| if p.variance > 0.0 { 1.0 / p.variance } else { max_finite })
            .collect()
    }
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let variance = if values.len() < 2 {
        0.0
    } else {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0)
    };
    (mean, variance)
}

/// Reduce a dataset to one point per sequence length.
///
/// `FreePinf` and `FixedPinf` use only sequences targeting `|↓⟩` and report
/// their `P↑`. `CombinedHalf` pools every sequence as the probability of
/// reporting its target. Lengths with no usable sequence are skipped.
pub fn aggregate(dataset: &RbDataset, mode: FitMode) -> Result<AggregatedDecay> {
    reduce(dataset, |r| match mode {
        FitMode::CombinedHalf => Some(r.success()),
        FitMode::FreePinf | FitMode::FixedPinf(_) => (r.target == Target::Down).then(|| r.p_up()),
    })
}

/// `P↑` per length over the sequences with the given target.
pub fn aggregate_target(dataset: &RbDataset, target: Target) -> Result<AggregatedDecay> {
    reduce(dataset, |r| (r.target == target).then(|| r.p_up()))
}

fn reduce(dataset: &RbDataset, value: impl Fn(&RbRecord) -> Option<f64>) -> Result<AggregatedDecay> {
    if dataset.records.is_empty() {
        return Err(Error::InsufficientData("dataset has no records"));
    }
    let mut lengths: Vec<u32> = dataset.records.iter().map(|r| r.n).collect();
    lengths.sort_unstable();
    lengths.dedup();

    let mut points = Vec::with_capacity(lengths.len());
    for n in lengths {
        let values: Vec<f64> = dataset.records.iter().filter(|r| r.n == n).filter_map(&value).collect();
        if values.is_empty() {
            continue;
        }
        let (mean, variance) = mean_and_variance(&values);
        points.push(DecayPoint { n, mean, variance, count: values.len() });
    }
    if points.is_empty() {
        return Err(Error::InsufficientData("no sequences match the selection"));
    }
    Ok(AggregatedDecay::from_points(points))
}

/// Asymptote estimate `(P↑(↑ target) + P↑(↓ target)) / 2` at the shortest
/// length that has both targets.
pub fn estimate_asymptote(dataset: &RbDataset) -> Result<f64> {
    let mut lengths: Vec<u32> = dataset.records.iter().map(|r| r.n).collect();
    lengths.sort_unstable();
    lengths.dedup();
    for n in lengths {
        let class_mean = |target: Target| {
            let v: Vec<f64> = dataset
                .records
                .iter()
                .filter(|r| r.n == n && r.target == target)
                .map(|r| r.p_up())
                .collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        if let (Some(up), Some(down)) = (class_mean(Target::Up), class_mean(Target::Down)) {
            return Ok(0.5 * (up + down));
        }
    }
    Err(Error::InsufficientData("no length has sequences for both targets"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{square_pulse, RbConfig};
    use alloc::vec;

    fn record(n: u32, k: u32, target: Target, ups: usize, shots: usize) -> RbRecord {
        let outcomes = (0..shots).map(|i| i < ups).collect();
        RbRecord { n, k, target, outcomes }
    }

    fn dataset(records: Vec<RbRecord>) -> RbDataset {
        RbDataset { config: RbConfig::new(square_pulse(1e-6)), records }
    }

    #[test]
    fn all_correct_gives_unit_means() {
        let d = dataset(vec![
            record(1, 0, Target::Up, 10, 10),
            record(1, 1, Target::Down, 0, 10),
            record(4, 0, Target::Down, 0, 10),
            record(4, 1, Target::Up, 10, 10),
        ]);
        let agg = aggregate(&d, FitMode::CombinedHalf).unwrap();
        for p in &agg.points {
            assert_eq!(p.mean, 1.0);
            assert_eq!(p.variance, 0.0);
        }
    }

    #[test]
    fn combined_flips_down_targets() {
        let d = dataset(vec![record(3, 0, Target::Up, 8, 10), record(3, 1, Target::Down, 2, 10)]);
        let agg = aggregate(&d, FitMode::CombinedHalf).unwrap();
        assert!((agg.points[0].mean - 0.8).abs() < 1e-15);
        assert_eq!(agg.points[0].variance, 0.0);
        let down_only = aggregate(&d, FitMode::FreePinf).unwrap();
        assert!((down_only.points[0].mean - 0.2).abs() < 1e-15);
        assert!(down_only.uniform_weights);
        assert!((estimate_asymptote(&d).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unbiased_variance() {
        let d = dataset(vec![
            record(2, 0, Target::Up, 6, 10),
            record(2, 1, Target::Up, 8, 10),
            record(2, 2, Target::Up, 10, 10),
        ]);
        let agg = aggregate(&d, FitMode::CombinedHalf).unwrap();
        assert!((agg.points[0].variance - 0.04).abs() < 1e-15);
        assert!(!agg.uniform_weights);
    }

    #[test]
    fn zero_variance_weight_is_capped() {
        let agg = AggregatedDecay::from_points(vec![
            DecayPoint { n: 1, mean: 1.0, variance: 0.0, count: 3 },
            DecayPoint { n: 2, mean: 0.9, variance: 0.01, count: 3 },
            DecayPoint { n: 4, mean: 0.8, variance: 0.04, count: 3 },
        ]);
        let w = agg.weights();
        assert_eq!(w[0], 100.0);
        assert_eq!(w[1], 100.0);
        assert_eq!(w[2], 25.0);
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(aggregate(&dataset(vec![]), FitMode::CombinedHalf).is_err());
        let only_up = dataset(vec![record(1, 0, Target::Up, 1, 1)]);
        assert!(aggregate(&only_up, FitMode::FreePinf).is_err());
    }
}
