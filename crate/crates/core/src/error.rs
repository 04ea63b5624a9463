use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A transcription or numerical inconsistency in the Clifford table.
    #[error("clifford group consistency failure: {0}")]
    GroupConsistency(&'static str),

    #[error("no clifford element matches the product unitary")]
    NoMatch,

    #[error("invalid qubit state: {0}")]
    InvalidState(&'static str),

    #[error("{name} = {value} is outside its allowed range")]
    Domain { name: &'static str, value: f64 },

    #[error("physical gate {0} has no single-gate clifford counterpart")]
    UnknownGate(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("experiment needs {requested} shots, above the cap of {cap}")]
    ResourceLimit { requested: u64, cap: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(&'static str),

    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),

    #[error("fit did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("fitted decay parameter p = {0} is outside (0, 1]")]
    DecayOutOfRange(f64),

    #[error("fit result carries no confidence interval")]
    MissingInterval,

    #[error("{failed} of {total} bootstrap resamples failed to fit")]
    BootstrapDiverged { failed: usize, total: usize },
}
