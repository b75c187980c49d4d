//! Error type shared across the crate.

use std::path::PathBuf;

/// Errors produced by vprep operations.
///
/// Variants split along the CLI's exit-code convention: environment
/// problems (I/O, missing executables, failed subprocesses) versus
/// contract/usage violations (bad dimensions, malformed inputs,
/// invalid configuration).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Underlying I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Y4M stream did not parse; names the offending token or region.
    #[error("y4m parse error: {0}")]
    Y4mParse(String),

    /// Input uses a format feature we deliberately do not support
    /// (bit depth, chroma subsampling, interlacing, ...).
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// Caller violated an operation precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid configuration (parameter ranges, profiles, templates).
    #[error("configuration error: {0}")]
    Config(String),

    /// An external executable could not be resolved.
    #[error("executable not found: {name} (searched: {searched})")]
    ExecutableNotFound { name: String, searched: String },

    /// An external process exited with a failure status.
    #[error("{name} failed with {status}: {stderr}")]
    Subprocess {
        name: String,
        status: String,
        stderr: String,
    },

    /// A degradation stage needs resources that are not configured.
    #[error("stage unavailable: {0}")]
    StageUnavailable(String),

    /// Decoded output does not match the source (frame count, dims, rate).
    #[error("pipeline integrity: {0}")]
    Integrity(String),

    /// RD curve data unusable for BD-rate (non-monotone, too few points).
    #[error("rd data error: {0}")]
    Data(String),

    /// The two curves share no quality interval.
    #[error("quality ranges do not overlap: {0}")]
    Overlap(String),

    /// PNG codec error from the underlying decoder/encoder.
    #[error("png error on {path}: {msg}")]
    Png { path: PathBuf, msg: String },

    /// Recipe/profile/report (de)serialization failure.
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the environment rather than the caller
    /// (maps to CLI exit code 1; everything else is exit code 2).
    pub fn is_environment(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::ExecutableNotFound { .. }
                | Error::Subprocess { .. }
                | Error::StageUnavailable(_)
                | Error::Png { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
