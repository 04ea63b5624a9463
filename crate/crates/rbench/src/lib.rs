//! Experiment orchestration, file formats and reports for `rbench-core`.

pub mod config;
pub mod dataset_io;
pub mod error;
pub mod parallel;
pub mod report;
pub mod sweep;

pub use error::{AppError, ExitCode};
