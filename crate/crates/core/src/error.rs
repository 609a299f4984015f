use std::path::PathBuf;

/// Every fallible operation in the crate reports through this enum.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("precision must be at least {min} decimal digits, got {got}")]
    PrecisionTooLow { got: u32, min: u32 },

    #[error("{routine} did not converge within {sweeps} sweeps (residual {residual})")]
    NonConvergence { routine: &'static str, sweeps: usize, residual: String },

    #[error("matrix is numerically singular at pivot {pivot} (|pivot| = {magnitude})")]
    Singular { pivot: usize, magnitude: String },

    #[error("argument {value} lies outside the domain of {function}")]
    Domain { function: &'static str, value: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),

    #[error("precision escalation required: {reason}")]
    PrecisionEscalation { reason: String },

    #[error("{what} requires at most {max} sites, got {got}")]
    OracleRange { what: &'static str, max: usize, got: usize },

    #[error("fit needs at least three samples with distinct abscissae: {0}")]
    DegenerateFit(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { field: field.into(), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
