//! Shot-level dataset files: `dataset.csv` with one row per shot, and a
//! `dataset.json` sidecar carrying the configuration.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rbench_core::clifford::Target;
use rbench_core::protocol::{RbConfig, RbDataset, RbRecord};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const DATASET_CSV: &str = "dataset.csv";
pub const DATASET_SIDECAR: &str = "dataset.json";
pub const DATASET_FORMAT: &str = "rbench-dataset/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub format: String,
    pub seed: u64,
    pub records: usize,
    pub shots: u64,
    /// Seconds since the Unix epoch, only when requested; left out by default
    /// so that repeated runs produce identical files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
    pub config: RbConfig,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    n: u32,
    k: u32,
    target: Target,
    shot_index: u32,
    outcome: u8,
}

/// `(csv, sidecar)` for a dataset directory, or for a path to either file.
pub fn dataset_paths(path: &Path) -> (PathBuf, PathBuf) {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("json") => (path.with_extension("csv"), path.with_extension("json")),
        _ => (path.join(DATASET_CSV), path.join(DATASET_SIDECAR)),
    }
}

pub fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_dataset(dir: &Path, dataset: &RbDataset, created_unix: Option<u64>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let (csv_path, sidecar_path) = dataset_paths(dir);

    let mut w = csv_writer(Vec::new());
    for r in &dataset.records {
        for (shot_index, &up) in r.outcomes.iter().enumerate() {
            w.serialize(Row { n: r.n, k: r.k, target: r.target, shot_index: shot_index as u32, outcome: u8::from(up) })
                .map_err(|e| AppError::dataset(&csv_path, e))?;
        }
    }
    if dataset.records.is_empty() {
        w.write_record(["n", "k", "target", "shot_index", "outcome"]).map_err(|e| AppError::dataset(&csv_path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::dataset(&csv_path, e))?;
    fs::write(&csv_path, bytes).map_err(|e| AppError::io(&csv_path, e))?;

    let sidecar = Sidecar {
        format: DATASET_FORMAT.to_string(),
        seed: dataset.seed(),
        records: dataset.records.len(),
        shots: dataset.records.iter().map(|r| r.outcomes.len() as u64).sum(),
        created_unix,
        config: dataset.config.clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises") + "\n";
    fs::write(&sidecar_path, json).map_err(|e| AppError::io(&sidecar_path, e))
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let sidecar: Sidecar =
        serde_path_to_error::deserialize(&mut de).map_err(|e| AppError::dataset(path, format!("{}: {}", e.path(), e.inner())))?;
    if sidecar.format != DATASET_FORMAT {
        return Err(AppError::dataset(path, format!("unsupported format `{}`", sidecar.format)));
    }
    Ok(sidecar)
}

/// Load and cross-check a dataset against its sidecar.
pub fn read_dataset(path: &Path) -> Result<RbDataset> {
    let (csv_path, sidecar_path) = dataset_paths(path);
    let sidecar = read_sidecar(&sidecar_path)?;
    let config = sidecar.config;
    let bad = |msg: String| AppError::dataset(&csv_path, msg);

    let file = fs::File::open(&csv_path).map_err(|e| AppError::io(&csv_path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(std::io::BufReader::new(file));
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?;
    if headers != vec!["n", "k", "target", "shot_index", "outcome"] {
        return Err(bad(format!("unexpected header {:?}", headers)));
    }

    let mut records: Vec<RbRecord> = Vec::new();
    for (line, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let up = match row.outcome {
            0 => false,
            1 => true,
            other => return Err(bad(format!("row {}: outcome must be 0 or 1, got {other}", line + 1))),
        };
        let continues = records.last().is_some_and(|r| r.n == row.n && r.k == row.k);
        if !continues {
            records.push(RbRecord { n: row.n, k: row.k, target: row.target, outcomes: Vec::new() });
        }
        let record = records.last_mut().expect("just pushed");
        if record.target != row.target {
            return Err(bad(format!("row {}: target changes within sequence ({}, {})", line + 1, row.n, row.k)));
        }
        if row.shot_index as usize != record.outcomes.len() {
            return Err(bad(format!("row {}: expected shot_index {}", line + 1, record.outcomes.len())));
        }
        record.outcomes.push(up);
    }

    let mut seen = HashSet::new();
    for r in &records {
        if !config.lengths.contains(&r.n) || r.k >= config.sequences_per_length {
            return Err(bad(format!("sequence ({}, {}) is not part of the configured experiment", r.n, r.k)));
        }
        if !seen.insert((r.n, r.k)) {
            return Err(bad(format!("sequence ({}, {}) appears twice", r.n, r.k)));
        }
        if r.outcomes.len() != config.shots_per_sequence as usize {
            return Err(bad(format!(
                "sequence ({}, {}) has {} shots, expected {}",
                r.n,
                r.k,
                r.outcomes.len(),
                config.shots_per_sequence
            )));
        }
    }
    if records.len() != sidecar.records {
        return Err(bad(format!("{} sequences, sidecar lists {}", records.len(), sidecar.records)));
    }
    let position = |n: u32| config.lengths.iter().position(|&x| x == n);
    records.sort_by_key(|r| (position(r.n), r.k));
    Ok(RbDataset { config, records })
}
