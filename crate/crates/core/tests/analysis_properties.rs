use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rbench_core::analysis::stats::student_t_quantile;
use rbench_core::analysis::{
    bootstrap_ci, clifford_fidelity, fit_decay, interleaved_fidelity, single_gate_fidelity, AggregatedDecay,
    DecayPoint, FitMode,
};
use rbench_core::protocol::ELECTRON_LENGTHS;
use rbench_core::Error;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn exact(f: impl Fn(f64) -> f64, variance: impl Fn(f64) -> f64) -> AggregatedDecay {
    AggregatedDecay::from_points(
        ELECTRON_LENGTHS
            .iter()
            .map(|&n| DecayPoint { n, mean: f(f64::from(n)), variance: variance(f64::from(n)), count: 15 })
            .collect(),
    )
}

/// Sequence means drawn around the model with a binomial-like spread.
fn noisy(p: f64, p0: f64, pinf: f64, seed: u64) -> AggregatedDecay {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 15usize;
    let points = ELECTRON_LENGTHS
        .iter()
        .map(|&n| {
            let m = p0 * p.powi(n as i32) + pinf;
            let sd = (m * (1.0 - m) / 200.0).sqrt().max(1e-4);
            let normal = Normal::new(m, sd).unwrap();
            let xs: Vec<f64> = (0..k).map(|_| normal.sample(&mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / k as f64;
            let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            DecayPoint { n, mean, variance, count: k }
        })
        .collect();
    AggregatedDecay::from_points(points)
}

#[test]
fn exact_model_data_is_recovered_in_every_mode() {
    let true_p: f64 = 0.998;
    let var = |n: f64| 1e-4 * (1.0 + n / 100.0);
    for (mode, pinf) in
        [(FitMode::FreePinf, 0.31), (FitMode::FixedPinf(0.31), 0.31), (FitMode::CombinedHalf, 0.5)]
    {
        let agg = exact(|n| 0.45 * true_p.powf(n) + pinf, var);
        let fit = fit_decay(&agg, mode).unwrap();
        assert!((fit.p.value - true_p).abs() < 1e-9, "{mode:?}: {}", fit.p.value);
        assert!(fit.diagnostics.converged);
    }
    let agg = exact(|n| 0.5 + 0.5 * true_p.powf(n), var);
    let fit = fit_decay(&agg, FitMode::CombinedHalf).unwrap();
    assert!((fit.clifford_fidelity.value - 0.999).abs() < 1e-9);
    let stored = fit.clifford_fidelity.value;
    assert!((clifford_fidelity(fit.p.value).unwrap() - stored).abs() < 1e-12);
}

#[test]
fn constant_data_is_degenerate() {
    let agg = exact(|_| 0.5, |_| 1e-4);
    for mode in [FitMode::FreePinf, FitMode::CombinedHalf] {
        assert!(matches!(fit_decay(&agg, mode), Err(Error::DegenerateData(_))));
    }
}

#[test]
fn too_few_points_are_rejected() {
    let agg = AggregatedDecay::from_points(vec![
        DecayPoint { n: 1, mean: 0.9, variance: 1e-4, count: 5 },
        DecayPoint { n: 10, mean: 0.8, variance: 1e-4, count: 5 },
    ]);
    assert!(fit_decay(&agg, FitMode::FreePinf).is_err());
    assert!(fit_decay(&agg, FitMode::CombinedHalf).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_rescaling_leaves_p_unchanged(a in 0.3f64..1.0, b in 0.0f64..0.3, seed in 0u64..1000) {
        let agg = noisy(0.997, 0.5, 0.5, seed);
        let base = fit_decay(&agg, FitMode::FreePinf).unwrap();
        let scaled = AggregatedDecay::from_points(
            agg.points.iter().map(|p| DecayPoint { mean: a * p.mean + b, variance: a * a * p.variance, ..*p }).collect(),
        );
        let fit = fit_decay(&scaled, FitMode::FreePinf).unwrap();
        prop_assert!((fit.p.value - base.p.value).abs() < 1e-9);
    }

    #[test]
    fn doubling_variances_keeps_estimates(seed in 0u64..1000) {
        let agg = noisy(0.995, 0.45, 0.5, seed);
        for mode in [FitMode::FreePinf, FitMode::CombinedHalf] {
            let a = fit_decay(&agg, mode).unwrap();
            let b = fit_decay(&agg.with_variance_scale(2.0), mode).unwrap();
            prop_assert!((a.p.value - b.p.value).abs() < 1e-10);
            prop_assert!((a.amplitude.value - b.amplitude.value).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_maps_are_monotone(p in 0.01f64..0.999, dp in 1e-6f64..1e-3) {
        let q = (p + dp).min(1.0);
        prop_assert!(clifford_fidelity(q).unwrap() > clifford_fidelity(p).unwrap());
        let (fp, fq) = (clifford_fidelity(p).unwrap(), clifford_fidelity(q).unwrap());
        if fp > 0.5 {
            prop_assert!(single_gate_fidelity(fq).unwrap() > single_gate_fidelity(fp).unwrap());
        }
        prop_assert!(interleaved_fidelity(q, 0.999).unwrap().fidelity > interleaved_fidelity(p, 0.999).unwrap().fidelity);
    }
}

#[test]
fn modes_agree_on_symmetric_data() {
    for seed in 0..20 {
        let agg = noisy(0.998, 0.5, 0.5, seed);
        let fits: Vec<_> = [FitMode::FreePinf, FitMode::FixedPinf(0.5), FitMode::CombinedHalf]
            .into_iter()
            .map(|m| fit_decay(&agg, m).unwrap())
            .collect();
        for a in &fits {
            for b in &fits {
                assert!(a.p.ci.unwrap().overlaps(&b.p.ci.unwrap()), "seed {seed}");
            }
        }
    }
}

#[test]
fn confidence_interval_coverage() {
    let trials = 200;
    let hits = (0..trials)
        .filter(|&seed| {
            let fit = fit_decay(&noisy(0.998, 0.5, 0.5, 10_000 + seed), FitMode::CombinedHalf).unwrap();
            fit.p.ci.unwrap().contains(0.998)
        })
        .count();
    let coverage = hits as f64 / trials as f64;
    assert!(coverage > 0.88, "{coverage}");
}

#[test]
fn bootstrap_tracks_covariance_interval() {
    let agg = noisy(0.998, 0.5, 0.5, 42);
    let fit = fit_decay(&agg, FitMode::CombinedHalf).unwrap();
    let boot = bootstrap_ci(&agg, FitMode::CombinedHalf, 1000, 9).unwrap();
    let ci = fit.p.ci.unwrap();
    assert!(boot.lo <= ci.hi && ci.lo <= boot.hi);
    let ratio = (boot.hi - boot.lo) / ci.width();
    assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    assert_eq!(boot.failed, 0);
}

#[test]
fn bootstrap_boundaries() {
    let agg = exact(|n| 0.5 + 0.5 * 0.99f64.powf(n), |_| 1e-4);
    let boot = bootstrap_ci(&agg, FitMode::CombinedHalf, 200, 1).unwrap();
    assert!(boot.hi - boot.lo < 1e-9);
    let single = bootstrap_ci(&noisy(0.998, 0.5, 0.5, 3), FitMode::CombinedHalf, 1, 1).unwrap();
    assert!(single.degenerate);
    assert_eq!(single.lo, single.hi);
}

#[test]
fn t_quantile_matches_reference_distribution() {
    for dof in [1.0, 2.0, 3.0, 5.0, 7.0, 8.0, 30.0, 120.0] {
        let reference = StudentsT::new(0.0, 1.0, dof).unwrap().inverse_cdf(0.975);
        assert!((student_t_quantile(0.975, dof) - reference).abs() < 1e-8 * reference, "dof {dof}");
    }
}
