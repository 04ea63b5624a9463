//! Weighted Levenberg-Marquardt fit of `P(N) = P₀ pᴺ + P∞`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::stats::student_t_quantile;
use super::AggregatedDecay;
use crate::clifford::MEAN_GATES_PER_CLIFFORD;
use crate::{Error, Result};

pub const CONFIDENCE_LEVEL: f64 = 0.95;
const MAX_ITERATIONS: usize = 500;
const RELATIVE_STEP_TOLERANCE: f64 = 1e-10;
const EQUAL_DATA_TOLERANCE: f64 = 1e-12;

/// Which decay model to fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// `P↑` of `|↓⟩`-target sequences with a free asymptote.
    FreePinf,
    /// `P↑` of `|↓⟩`-target sequences with the asymptote pinned.
    FixedPinf(f64),
    /// Target-reporting probability of all sequences, asymptote pinned at 1/2.
    CombinedHalf,
}

impl FitMode {
    fn pinned_asymptote(self) -> Option<f64> {
        match self {
            FitMode::FreePinf => None,
            FitMode::FixedPinf(v) => Some(v),
            FitMode::CombinedHalf => Some(0.5),
        }
    }

    pub fn free_parameters(self) -> usize {
        if self.pinned_asymptote().is_some() {
            2
        } else {
            3
        }
    }

    pub fn min_points(self) -> usize {
        self.free_parameters().max(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Interval {
        Interval { lo: f(self.lo), hi: f(self.hi) }
    }
}

/// A point estimate with an optional 95 % confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci: Option<Interval>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, ci: None }
    }

    /// Interval half-width relative to the value.
    pub fn relative_half_width(&self) -> Option<f64> {
        self.ci.map(|ci| ci.half_width() / self.value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub weighted_rss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub points: usize,
    pub dof: usize,
    pub uniform_weights: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub mode: FitMode,
    pub p: Estimate,
    pub amplitude: Estimate,
    /// Interval only when the asymptote was a free parameter.
    pub asymptote: Estimate,
    pub clifford_fidelity: Estimate,
    pub single_gate_fidelity: Estimate,
    pub diagnostics: FitDiagnostics,
}

impl FitResult {
    pub fn model(&self, n: u32) -> f64 {
        self.amplitude.value * self.p.value.powi(n as i32) + self.asymptote.value
    }
}

#[derive(Clone, Copy)]
struct Problem<'a> {
    n: &'a [f64],
    y: &'a [f64],
    w: &'a [f64],
    pinned: Option<f64>,
}

impl Problem<'_> {
    fn params(&self) -> usize {
        if self.pinned.is_some() {
            2
        } else {
            3
        }
    }

    fn unpack(&self, theta: &[f64; 3]) -> (f64, f64, f64) {
        (theta[0], theta[1], self.pinned.unwrap_or(theta[2]))
    }

    fn model(&self, theta: &[f64; 3], n: f64) -> f64 {
        let (a, p, c) = self.unpack(theta);
        a * p.powf(n) + c
    }

    fn cost(&self, theta: &[f64; 3]) -> f64 {
        (0..self.n.len())
            .map(|i| {
                let r = self.y[i] - self.model(theta, self.n[i]);
                self.w[i] * r * r
            })
            .sum()
    }

    /// `JᵀWJ` and `JᵀW(y − f)` for the model Jacobian `J`.
    fn normal_equations(&self, theta: &[f64; 3]) -> ([[f64; 3]; 3], [f64; 3]) {
        let k = self.params();
        let (a, p, _) = self.unpack(theta);
        let mut h = [[0.0; 3]; 3];
        let mut g = [0.0; 3];
        for i in 0..self.n.len() {
            let n = self.n[i];
            let pn = p.powf(n);
            let d_p = if n == 0.0 { 0.0 } else { a * n * p.powf(n - 1.0) };
            let jac = [pn, d_p, 1.0];
            let r = self.y[i] - (a * pn + self.pinned.unwrap_or(theta[2]));
            for u in 0..k {
                g[u] += self.w[i] * jac[u] * r;
                for v in 0..k {
                    h[u][v] += self.w[i] * jac[u] * jac[v];
                }
            }
        }
        (h, g)
    }
}

/// Solve `m x = b` for the leading `k×k` block by Gaussian elimination.
fn solve(mut m: [[f64; 3]; 3], mut b: [f64; 3], k: usize) -> Option<[f64; 3]> {
    for col in 0..k {
        let pivot = (col..k).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if !(m[pivot][col].abs() > 0.0) {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                m[row][c] -= f * m[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..k).rev() {
        let mut s = b[row];
        for c in row + 1..k {
            s -= m[row][c] * x[c];
        }
        x[row] = s / m[row][row];
    }
    x.iter().take(k).all(|v| v.is_finite()).then_some(x)
}

fn invert(m: [[f64; 3]; 3], k: usize) -> Option<[[f64; 3]; 3]> {
    let mut inv = [[0.0; 3]; 3];
    for col in 0..k {
        let mut e = [0.0; 3];
        e[col] = 1.0;
        let x = solve(m, e, k)?;
        for row in 0..k {
            inv[row][col] = x[row];
        }
    }
    Some(inv)
}

fn initial_guess(problem: &Problem<'_>) -> [f64; 3] {
    let len = problem.y.len();
    let asymptote = problem.pinned.unwrap_or_else(|| {
        let tail = len.div_ceil(4).max(1);
        problem.y[len - tail..].iter().sum::<f64>() / tail as f64
    });

    // log-linear regression of |y - P∞| against N
    let pts: Vec<(f64, f64)> = problem
        .n
        .iter()
        .zip(problem.y)
        .filter_map(|(&n, &y)| {
            let d = (y - asymptote).abs();
            (d > EQUAL_DATA_TOLERANCE).then(|| (n, d.ln()))
        })
        .collect();
    let mut p = 0.99;
    if pts.len() >= 2 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / m;
        let my = pts.iter().map(|q| q.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|q| (q.0 - mx) * (q.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        if sxx > 0.0 {
            let slope_p = (sxy / sxx).exp();
            if slope_p.is_finite() && slope_p > 0.0 {
                p = slope_p.min(1.0);
            }
        }
    }
    [problem.y[0] - asymptote, p, asymptote]
}

/// Minimise `Σ w_N (P_N − model(N))²` with `w_N = 1/variance_N`.
pub fn fit_decay(agg: &AggregatedDecay, mode: FitMode) -> Result<FitResult> {
    let mut points = agg.points.clone();
    points.sort_by_key(|p| p.n);
    let mut distinct: Vec<u32> = points.iter().map(|p| p.n).collect();
    distinct.dedup();
    if distinct.len() < mode.min_points() {
        return Err(Error::InsufficientData("too few sequence lengths for the fit mode"));
    }
    let weights_by_point = agg.weights();
    let mut order: Vec<usize> = (0..agg.points.len()).collect();
    order.sort_by_key(|&i| agg.points[i].n);
    let n: Vec<f64> = order.iter().map(|&i| f64::from(agg.points[i].n)).collect();
    let y: Vec<f64> = order.iter().map(|&i| agg.points[i].mean).collect();
    let w: Vec<f64> = order.iter().map(|&i| weights_by_point[i]).collect();
    fit_arrays(&n, &y, &w, mode, agg.uniform_weights)
}

pub(crate) fn fit_arrays(n: &[f64], y: &[f64], w: &[f64], mode: FitMode, uniform_weights: bool) -> Result<FitResult> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InsufficientData("non-finite data point"));
    }
    let pinned = mode.pinned_asymptote();
    let first = y[0];
    if y.iter().all(|v| (v - first).abs() < EQUAL_DATA_TOLERANCE)
        && pinned.map_or(true, |c| (first - c).abs() < EQUAL_DATA_TOLERANCE)
    {
        return Err(Error::DegenerateData("no decay in the data, p is unidentifiable"));
    }

    let problem = Problem { n, y, w, pinned };
    let k = problem.params();
    let mut theta = initial_guess(&problem);
    let mut cost = problem.cost(&theta);
    let mut lambda = 1e-3;
    let mut converged = cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let (h, g) = problem.normal_equations(&theta);
        let mut damped = h;
        for d in 0..k {
            damped[d][d] += lambda * h[d][d].max(1e-300);
        }
        let Some(step) = solve(damped, g, k) else {
            lambda *= 10.0;
            continue;
        };
        let relative = (0..k)
            .map(|j| step[j].abs() / theta[j].abs().max(1e-12))
            .fold(0.0, f64::max);
        let mut trial = theta;
        for j in 0..k {
            trial[j] += step[j];
        }
        let trial_cost = if trial[1] > 0.0 { problem.cost(&trial) } else { f64::INFINITY };
        if trial_cost.is_finite() && trial_cost <= cost {
            theta = trial;
            cost = trial_cost;
            lambda = (lambda / 10.0).max(1e-15);
            if relative < RELATIVE_STEP_TOLERANCE || cost == 0.0 {
                converged = true;
            }
        } else {
            if relative < RELATIVE_STEP_TOLERANCE {
                converged = true;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations });
    }

    let (a, p, c) = problem.unpack(&theta);
    if !(p > 0.0) || p > 1.0 + 1e-12 {
        return Err(Error::DecayOutOfRange(p));
    }
    let p = p.min(1.0);

    let points = n.len();
    let dof = points - k;
    let covariance = if dof > 0 {
        let (h, _) = problem.normal_equations(&theta);
        invert(h, k).map(|inv| {
            let s2 = cost / dof as f64;
            let mut cov = [0.0; 3];
            for j in 0..k {
                cov[j] = (inv[j][j] * s2).max(0.0);
            }
            cov
        })
    } else {
        None
    };
    let t = if dof > 0 { student_t_quantile(0.5 + CONFIDENCE_LEVEL / 2.0, dof as f64) } else { f64::NAN };
    let estimate = |value: f64, slot: usize| Estimate {
        value,
        ci: covariance.map(|cov| {
            let half = t * cov[slot].sqrt();
            Interval { lo: value - half, hi: value + half }
        }),
    };

    let p_est = estimate(p, 1);
    let asymptote = if pinned.is_some() { Estimate::exact(c) } else { estimate(c, 2) };
    let to_fc = |x: f64| (1.0 + x) / 2.0;
    let to_single = |x: f64| 1.0 - (1.0 - to_fc(x)) / MEAN_GATES_PER_CLIFFORD;
    Ok(FitResult {
        mode,
        p: p_est,
        amplitude: estimate(a, 0),
        asymptote,
        clifford_fidelity: Estimate { value: to_fc(p), ci: p_est.ci.map(|ci| ci.map(to_fc)) },
        single_gate_fidelity: Estimate { value: to_single(p), ci: p_est.ci.map(|ci| ci.map(to_single)) },
        diagnostics: FitDiagnostics {
            weighted_rss: cost,
            iterations,
            converged,
            points,
            dof,
            uniform_weights,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::DecayPoint;
    use crate::protocol::ELECTRON_LENGTHS;
    use alloc::vec;

    fn synthetic(a: f64, p: f64, c: f64, var: impl Fn(u32) -> f64) -> AggregatedDecay {
        AggregatedDecay::from_points(
            ELECTRON_LENGTHS
                .iter()
                .map(|&n| DecayPoint { n, mean: a * p.powi(n as i32) + c, variance: var(n), count: 15 })
                .collect(),
        )
    }

    #[test]
    fn exact_data_recovered() {
        let agg = synthetic(0.5, 0.998, 0.5, |n| 1e-4 + 1e-6 * f64::from(n));
        let fit = fit_decay(&agg, FitMode::CombinedHalf).unwrap();
        assert!((fit.p.value - 0.998).abs() < 1e-9);
        assert!((fit.clifford_fidelity.value - 0.999).abs() < 1e-9);
        assert!(fit.diagnostics.converged);
        let ci = fit.p.ci.unwrap();
        assert!(ci.width() < 1e-9);
    }

    #[test]
    fn constant_data_is_degenerate() {
        let agg = synthetic(0.0, 0.9, 0.5, |_| 1e-3);
        assert!(matches!(fit_decay(&agg, FitMode::CombinedHalf), Err(Error::DegenerateData(_))));
        assert!(matches!(fit_decay(&agg, FitMode::FreePinf), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn perfect_data_fits_unit_decay() {
        let agg = synthetic(0.5, 1.0, 0.5, |_| 0.0);
        let fit = fit_decay(&agg, FitMode::CombinedHalf).unwrap();
        assert_eq!(fit.p.value, 1.0);
        assert!(fit.clifford_fidelity.ci.unwrap().contains(1.0));
    }

    #[test]
    fn too_few_points() {
        let agg = AggregatedDecay::from_points(vec![
            DecayPoint { n: 1, mean: 0.9, variance: 1e-3, count: 5 },
            DecayPoint { n: 10, mean: 0.8, variance: 1e-3, count: 5 },
        ]);
        assert!(fit_decay(&agg, FitMode::FreePinf).is_err());
        let fit = fit_decay(&agg, FitMode::CombinedHalf).unwrap();
        assert_eq!(fit.diagnostics.dof, 0);
        assert!(fit.p.ci.is_none());
    }

    #[test]
    fn stored_fidelity_consistent() {
        let agg = synthetic(-0.45, 0.995, 0.48, |n| 1e-3 * (1.0 + f64::from(n) / 100.0));
        let fit = fit_decay(&agg, FitMode::FreePinf).unwrap();
        assert!(((1.0 + fit.p.value) / 2.0 - fit.clifford_fidelity.value).abs() < 1e-12);
        assert!((fit.asymptote.value - 0.48).abs() < 1e-8);
    }

    #[test]
    fn solver_small_system() {
        let m = [[4.0, 1.0, 0.0], [1.0, 3.0, 0.0], [0.0, 0.0, 0.0]];
        let x = solve(m, [1.0, 2.0, 0.0], 2).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-15);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-15);
    }
}
