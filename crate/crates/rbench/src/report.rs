//! JSON summaries and CSV plot tables.

use std::fs;
use std::path::Path;

use rbench_core::analysis::{
    aggregate, aggregate_target, estimate_asymptote, fit_decay, interleaved_ci, AggregatedDecay, BootstrapInterval,
    FitMode, FitResult, InterleavedFidelity,
};
use rbench_core::clifford::{PhysicalGate, Target};
use rbench_core::protocol::RbDataset;
use rbench_core::pulse::PulseShape;
use serde::{Deserialize, Serialize};

use crate::config::ModeArg;
use crate::dataset_io::csv_writer;
use crate::error::{AppError, Result};
use crate::sweep::SweepResult;

pub const FIT_REPORT: &str = "fit.json";
pub const DECAY_CSV: &str = "decay.csv";
pub const DECAY_UP_CSV: &str = "decay_up.csv";
pub const DECAY_DOWN_CSV: &str = "decay_down.csv";
pub const INTERLEAVED_CSV: &str = "interleaved.csv";
pub const INTERLEAVED_JSON: &str = "interleaved.json";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";

/// Row order of the interleaved table.
pub const INTERLEAVED_GATES: [PhysicalGate; 6] = [
    PhysicalGate::X,
    PhysicalGate::Y,
    PhysicalGate::HalfX,
    PhysicalGate::HalfY,
    PhysicalGate::MinusHalfX,
    PhysicalGate::MinusHalfY,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub n: u32,
    pub mean: f64,
    pub sem: f64,
    pub count: usize,
    pub fit_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub seed: u64,
    pub shape: PulseShape,
    pub pi_duration: f64,
    pub interleaved_gate: Option<PhysicalGate>,
    pub fit: FitResult,
    pub bootstrap: Option<BootstrapInterval>,
    pub points: Vec<PointRow>,
}

impl FitReport {
    pub fn new(dataset: &RbDataset, agg: &AggregatedDecay, fit: FitResult, bootstrap: Option<BootstrapInterval>) -> Self {
        FitReport {
            seed: dataset.seed(),
            shape: dataset.config.pulse.shape,
            pi_duration: dataset.config.pulse.pi_duration,
            interleaved_gate: dataset.config.interleaved_gate,
            fit,
            bootstrap,
            points: point_rows(agg, Some(&fit)),
        }
    }
}

fn point_rows(agg: &AggregatedDecay, fit: Option<&FitResult>) -> Vec<PointRow> {
    agg.points
        .iter()
        .map(|p| PointRow {
            n: p.n,
            mean: p.mean,
            sem: p.sem(),
            count: p.count,
            fit_value: fit.map(|f| f.model(p.n)),
        })
        .collect()
}

/// Resolve a command-line mode against a dataset.
pub fn resolve_mode(dataset: &RbDataset, mode: ModeArg) -> Result<FitMode> {
    Ok(match mode {
        ModeArg::Free => FitMode::FreePinf,
        ModeArg::Fixed(Some(v)) => FitMode::FixedPinf(v),
        ModeArg::Fixed(None) => FitMode::FixedPinf(estimate_asymptote(dataset)?),
        ModeArg::Combined => FitMode::CombinedHalf,
    })
}

pub fn fit_dataset(dataset: &RbDataset, mode: FitMode) -> Result<(AggregatedDecay, FitResult)> {
    let agg = aggregate(dataset, mode)?;
    let fit = fit_decay(&agg, mode)?;
    Ok((agg, fit))
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

fn write_file(path: &Path, bytes: Vec<u8>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| AppError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serialises") + "\n";
    write_file(path, text.into_bytes())
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv_writer(Vec::new());
    let err = |e: csv::Error| AppError::dataset(path, e);
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::dataset(path, e.to_string()))?;
    write_file(path, bytes)
}

fn decay_rows(points: &[PointRow]) -> Vec<Vec<String>> {
    points.iter().map(|p| vec![p.n.to_string(), fmt(p.mean), fmt(p.sem), p.fit_value.map_or(String::new(), fmt)]).collect()
}

/// `fit.json`, the fitted decay table and, optionally, per-target tables.
pub fn write_fit_outputs(dir: &Path, dataset: &RbDataset, report: &FitReport, per_target: bool) -> Result<()> {
    write_json(&dir.join(FIT_REPORT), report)?;
    let mean_column = match report.fit.mode {
        FitMode::CombinedHalf => "mean_success",
        FitMode::FreePinf | FitMode::FixedPinf(_) => "mean_p_up",
    };
    write_table(&dir.join(DECAY_CSV), &["n", mean_column, "sem", "fit_value"], &decay_rows(&report.points))?;
    if per_target {
        for (target, name) in [(Target::Up, DECAY_UP_CSV), (Target::Down, DECAY_DOWN_CSV)] {
            let rows = match aggregate_target(dataset, target) {
                Ok(agg) => {
                    let fit = fit_decay(&agg, FitMode::FreePinf).ok();
                    decay_rows(&point_rows(&agg, fit.as_ref()))
                }
                Err(_) => Vec::new(),
            };
            write_table(&dir.join(name), &["n", "mean_p_up", "sem", "fit_value"], &rows)?;
        }
    }
    Ok(())
}

pub fn read_fit_report(path: &Path) -> Result<FitReport> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| AppError::dataset(path, format!("{}: {}", e.path(), e.inner())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterleavedRow {
    pub gate: PhysicalGate,
    pub p_gate: rbench_core::analysis::Estimate,
    pub result: InterleavedFidelity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterleavedReport {
    pub reference: FitResult,
    pub rows: Vec<InterleavedRow>,
}

impl InterleavedReport {
    /// Rows from `(gate, fit)` pairs, in table order.
    pub fn new(reference: FitResult, fits: &[(PhysicalGate, FitResult)]) -> Result<Self> {
        let mut rows = fits
            .iter()
            .map(|(gate, fit)| Ok(InterleavedRow { gate: *gate, p_gate: fit.p, result: interleaved_ci(&reference, fit)? }))
            .collect::<Result<Vec<_>>>()?;
        let rank = |g: PhysicalGate| INTERLEAVED_GATES.iter().position(|&x| x == g).unwrap_or(INTERLEAVED_GATES.len());
        rows.sort_by_key(|r| rank(r.gate));
        Ok(InterleavedReport { reference, rows })
    }
}

pub fn write_interleaved(dir: &Path, report: &InterleavedReport) -> Result<()> {
    write_json(&dir.join(INTERLEAVED_JSON), report)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let ci = r.result.ci;
            vec![
                r.gate.label().to_string(),
                fmt(r.p_gate.value),
                fmt(r.result.fidelity),
                ci.map_or(String::new(), |c| fmt(c.lo)),
                ci.map_or(String::new(), |c| fmt(c.hi)),
                r.result.above_one.to_string(),
            ]
        })
        .collect();
    write_table(&dir.join(INTERLEAVED_CSV), &["gate", "p_gate", "f_gate", "f_gate_lo", "f_gate_hi", "above_one"], &rows)
}

pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<()> {
    write_json(&dir.join(SWEEP_JSON), result)?;
    let rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| {
            let (p, fc, lo, hi, fs) = match &r.fit {
                Some(s) => {
                    let ci = s.clifford_fidelity.ci;
                    (
                        fmt(s.p.value),
                        fmt(s.clifford_fidelity.value),
                        ci.map_or(String::new(), |c| fmt(c.lo)),
                        ci.map_or(String::new(), |c| fmt(c.hi)),
                        fmt(s.single_gate_fidelity.value),
                    )
                }
                None => Default::default(),
            };
            let error = r.error.as_ref().map_or(String::new(), |e| e.kind.clone());
            vec![fmt(r.pi_duration), r.shape.label().to_string(), p, fc, lo, hi, fs, error]
        })
        .collect();
    write_table(&dir.join(SWEEP_CSV), &["pi_duration", "shape", "p", "f_c", "f_c_lo", "f_c_hi", "f_single", "error"], &rows)
}
