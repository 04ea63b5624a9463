use std::path::PathBuf;

use rbench_core::Error as CoreError;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    Success = 0,
    Failure = 1,
    Config = 2,
    Fit = 3,
    Invariant = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Dataset { path: PathBuf, message: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn dataset(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        AppError::Dataset { path: path.into(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            AppError::Config(_) => ExitCode::Config,
            AppError::Io { .. } | AppError::Dataset { .. } => ExitCode::Failure,
            AppError::Invariant(_) => ExitCode::Invariant,
            AppError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &CoreError) -> ExitCode {
    match e {
        CoreError::GroupConsistency(_) | CoreError::NoMatch | CoreError::InvalidState(_) => ExitCode::Invariant,
        CoreError::Domain { .. }
        | CoreError::UnknownGate(_)
        | CoreError::InvalidConfig(_)
        | CoreError::ResourceLimit { .. } => ExitCode::Config,
        CoreError::InsufficientData(_)
        | CoreError::DegenerateData(_)
        | CoreError::NonConvergence { .. }
        | CoreError::DecayOutOfRange(_)
        | CoreError::MissingInterval
        | CoreError::BootstrapDiverged { .. } => ExitCode::Fit,
    }
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;
