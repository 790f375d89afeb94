use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid optical sample at {omega} eV: {reason}")]
    InvalidSample { omega: f64, reason: String },

    #[error("dataset needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("duplicate frequency {omega} eV in dataset")]
    DuplicateFrequency { omega: f64 },

    #[error("window function vanishes on the imaginary axis near xi = {xi} eV (cancellation ratio {ratio:.3e})")]
    WindowZero { xi: f64, ratio: f64 },

    #[error("window function has a pole at omega = {omega} eV")]
    WindowPole { omega: f64 },

    #[error("{what} = {value} eV is outside the covered range [{lo}, {hi}] eV")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("Matsubara sum not converged at n_max = {n_max}: estimated remainder {remainder:.3e} of total (increase n_max_factor)")]
    MatsubaraNotConverged { n_max: usize, remainder: f64 },

    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("{path}:{line}: {reason}")]
    MalformedRow {
        path: String,
        line: u64,
        reason: String,
    },

    #[error("{path}: bad header, expected `{expected}`, found `{found}`")]
    BadHeader {
        path: String,
        expected: String,
        found: String,
    },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("fit rejected: {0}")]
    FitRejected(String),

    #[error("empty dataset after merge and exclusions")]
    EmptyMerge,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
