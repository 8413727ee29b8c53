//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by the simulation library and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A channel index outside `1..=n_channels`.
    #[error("channel index {k} out of range for a plan with {n} channels")]
    ChannelIndex { k: usize, n: usize },

    /// A scalar parameter outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A floating-point quantity left its mathematically valid domain
    /// (beyond what rounding guards can absorb).
    #[error("numerical domain error: {0}")]
    Numerical(String),

    /// Configuration file or flag-level problem.
    #[error("config error: {0}")]
    Config(String),

    /// File-system failure, with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// One or more verification checks failed.
    #[error("verification failed: {failed} of {total} checks did not pass")]
    Verification { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
