use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// The CLI maps [`Error::Io`] to exit code 2 and every other variant to 1.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve was singular or too ill-conditioned to trust.
    #[error("numerical error: {message} (condition estimate {condition:e})")]
    Numerical { message: String, condition: f64 },

    /// A simulation configuration violated one of its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// A bot or publisher was requested that the dataset does not contain.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// The dataset carries too little information for the requested estimate.
    #[error("degenerate dataset: {0}")]
    Degenerate(String),

    /// A record could not be parsed or failed validation.
    #[error("{path}: line {line}: {field}: {message}")]
    Invalid {
        path: String,
        line: usize,
        field: String,
        message: String,
    },

    /// A whole-file validation failure not tied to one line.
    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    /// The file declares a format version this build does not read.
    #[error("{path}: unsupported format version '{found}' (expected '{expected}')")]
    Version {
        path: String,
        found: String,
        expected: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
