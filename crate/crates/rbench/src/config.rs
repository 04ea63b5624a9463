//! Experiment configuration files and presets.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rbench_core::analysis::FitMode;
use rbench_core::clifford::PhysicalGate;
use rbench_core::dynamics::{sigma_from_t2_star, NoiseModel, DEFAULT_TIME_QUANTUM};
use rbench_core::protocol::{
    RbConfig, SpamModel, TargetPolicy, DEFAULT_MAX_TOTAL_SHOTS, ELECTRON_LENGTHS, NUCLEAR_LENGTHS,
};
use rbench_core::pulse::{PulseSettings, PulseShape};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{AppError, Result};

pub const PRESET_NAMES: [&str; 3] = ["electron-square", "electron-sinc", "nuclear-square"];

/// Electron π duration with square pulses, seconds.
pub const ELECTRON_SQUARE_PI: f64 = 2.08e-6;
/// Electron π duration with sinc-3 pulses, seconds.
pub const ELECTRON_SINC_PI: f64 = 11.06e-6;
pub const NUCLEAR_SQUARE_PI: f64 = 150e-6;
/// Ionised-donor nuclear dephasing time, seconds.
pub const NUCLEAR_T2_STAR: f64 = 0.6;

/// One point of a pulse-duration sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub pi_duration: f64,
    pub shape: PulseShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportOptions {
    /// Decay model for sweeps and `rb fit` without `--mode`.
    pub fit_mode: FitMode,
    /// Residual-bootstrap resamples; 0 skips the bootstrap.
    pub bootstrap_resamples: usize,
    /// Write `↑`- and `↓`-target decay tables next to the fitted curve.
    pub per_target: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { fit_mode: FitMode::CombinedHalf, bootstrap_resamples: 0, per_target: true }
    }
}

/// Everything a run needs: the experiment itself plus orchestration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub lengths: Vec<u32>,
    pub sequences_per_length: u32,
    pub shots_per_sequence: u32,
    #[serde(default)]
    pub interleaved_gate: Option<PhysicalGate>,
    #[serde(default)]
    pub target_policy: TargetPolicy,
    #[serde(default)]
    pub seed: u64,
    pub pulse: PulseSettings,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub spam: SpamModel,
    #[serde(default)]
    pub share_reference_sequences: bool,
    #[serde(default = "default_max_total_shots")]
    pub max_total_shots: u64,
    #[serde(default)]
    pub sweep: Vec<SweepPoint>,
    #[serde(default)]
    pub report: ReportOptions,
}

fn default_max_total_shots() -> u64 {
    DEFAULT_MAX_TOTAL_SHOTS
}

impl ExperimentConfig {
    pub fn from_rb(rb: RbConfig) -> Self {
        ExperimentConfig {
            preset: None,
            output_dir: None,
            lengths: rb.lengths,
            sequences_per_length: rb.sequences_per_length,
            shots_per_sequence: rb.shots_per_sequence,
            interleaved_gate: rb.interleaved_gate,
            target_policy: rb.target_policy,
            seed: rb.seed,
            pulse: rb.pulse,
            noise: rb.noise,
            spam: rb.spam,
            share_reference_sequences: rb.share_reference_sequences,
            max_total_shots: rb.max_total_shots,
            sweep: Vec::new(),
            report: ReportOptions::default(),
        }
    }

    pub fn rb_config(&self) -> RbConfig {
        RbConfig {
            lengths: self.lengths.clone(),
            sequences_per_length: self.sequences_per_length,
            shots_per_sequence: self.shots_per_sequence,
            interleaved_gate: self.interleaved_gate,
            target_policy: self.target_policy,
            seed: self.seed,
            pulse: self.pulse,
            noise: self.noise,
            spam: self.spam,
            share_reference_sequences: self.share_reference_sequences,
            max_total_shots: self.max_total_shots,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rb_config().validate().map_err(|e| AppError::Config(e.to_string()))?;
        for (i, point) in self.sweep.iter().enumerate() {
            if !(point.pi_duration > 0.0 && point.pi_duration.is_finite()) {
                return Err(AppError::Config(format!("sweep[{i}].pi_duration must be positive")));
            }
        }
        if let FitMode::FixedPinf(v) = self.report.fit_mode {
            if !v.is_finite() {
                return Err(AppError::Config("report.fit_mode: asymptote must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises") + "\n"
    }
}

/// The named configuration, fully populated.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let electron = |shape, pi_duration| {
        let mut rb = RbConfig::new(PulseSettings { shape, pi_duration });
        rb.lengths = ELECTRON_LENGTHS.to_vec();
        rb.sequences_per_length = 15;
        rb.shots_per_sequence = 200;
        rb.noise = NoiseModel::hardware_default();
        rb
    };
    let rb = match name {
        "electron-square" => electron(PulseShape::Square, ELECTRON_SQUARE_PI),
        "electron-sinc" => electron(PulseShape::Sinc3, ELECTRON_SINC_PI),
        "nuclear-square" => {
            let mut rb = RbConfig::new(PulseSettings { shape: PulseShape::Square, pi_duration: NUCLEAR_SQUARE_PI });
            rb.lengths = NUCLEAR_LENGTHS.to_vec();
            rb.sequences_per_length = 5;
            rb.shots_per_sequence = 75;
            rb.noise = NoiseModel {
                detuning_sigma: sigma_from_t2_star(NUCLEAR_T2_STAR),
                time_quantum: DEFAULT_TIME_QUANTUM,
                ..NoiseModel::ideal()
            };
            rb
        }
        other => {
            return Err(AppError::Config(format!(
                "unknown preset `{other}` (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let mut config = ExperimentConfig::from_rb(rb);
    config.preset = Some(name.to_string());
    Ok(config)
}

/// Sources combined by [`parse_config`], lowest precedence first: preset,
/// file, explicit overrides.
#[derive(Debug, Clone, Default)]
pub struct ConfigSources<'a> {
    pub preset: Option<&'a str>,
    pub file: Option<&'a Path>,
    pub seed: Option<u64>,
    pub output_dir: Option<&'a Path>,
}

/// Resolve and validate a configuration.
pub fn parse_config(sources: &ConfigSources<'_>) -> Result<ExperimentConfig> {
    let file_value = match sources.file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            Some(normalize_aliases(value)?)
        }
        None => None,
    };
    let preset_name = sources
        .preset
        .map(str::to_string)
        .or_else(|| file_value.as_ref().and_then(|v| v.get("preset")).and_then(Value::as_str).map(str::to_string));

    let mut value = match &preset_name {
        Some(name) => serde_json::to_value(preset(name)?).expect("preset serialises"),
        None => Value::Object(Map::new()),
    };
    if let Some(file) = file_value {
        merge(&mut value, file);
    }
    let object = value.as_object_mut().ok_or_else(|| AppError::Config("config must be a JSON object".into()))?;
    if let Some(name) = preset_name {
        object.insert("preset".into(), Value::String(name));
    }
    if let Some(seed) = sources.seed {
        object.insert("seed".into(), Value::from(seed));
    }
    if let Some(dir) = sources.output_dir {
        object.insert("output_dir".into(), Value::String(dir.display().to_string()));
    }
    let config = from_value(value)?;
    config.validate()?;
    Ok(config)
}

/// Deserialise a config, reporting the path of the offending field.
pub fn from_value(value: Value) -> Result<ExperimentConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            AppError::Config(e.into_inner().to_string())
        } else {
            AppError::Config(format!("{path}: {}", e.into_inner()))
        }
    })
}

fn normalize_aliases(mut value: Value) -> Result<Value> {
    if let Some(object) = value.as_object_mut() {
        for (alias, field) in [("k", "sequences_per_length"), ("r", "shots_per_sequence")] {
            if let Some(v) = object.remove(alias) {
                if object.contains_key(field) {
                    return Err(AppError::Config(format!("both `{alias}` and `{field}` given")));
                }
                object.insert(field.to_string(), v);
            }
        }
    }
    Ok(value)
}

/// Overlay `patch` onto `base`; objects merge key by key, anything else
/// replaces.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (key, v) in p {
                match b.get_mut(&key) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(key, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Fit model as given on the command line: `free`, `fixed`, `fixed=<v>` or
/// `combined`. A bare `fixed` estimates the asymptote from the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeArg {
    Free,
    Fixed(Option<f64>),
    Combined,
}

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "free" => Ok(ModeArg::Free),
            "fixed" => Ok(ModeArg::Fixed(None)),
            "combined" => Ok(ModeArg::Combined),
            _ => match s.strip_prefix("fixed=") {
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(|v| ModeArg::Fixed(Some(v)))
                    .ok_or_else(|| format!("invalid asymptote `{v}`")),
                None => Err(format!("unknown fit mode `{s}` (free, fixed[=v], combined)")),
            },
        }
    }
}

impl From<FitMode> for ModeArg {
    fn from(mode: FitMode) -> Self {
        match mode {
            FitMode::FreePinf => ModeArg::Free,
            FitMode::FixedPinf(v) => ModeArg::Fixed(Some(v)),
            FitMode::CombinedHalf => ModeArg::Combined,
        }
    }
}
