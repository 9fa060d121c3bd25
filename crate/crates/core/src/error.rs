use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A map parameter sits outside the open interval (0, 1).
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// An argument outside the domain of the operation (t = 0, precision of zero, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("block parameter n={0} outside 1..=16")]
    InvalidWidth(u32),

    #[error("width mismatch: expected n={expected}, found n={found}")]
    WidthMismatch { expected: u32, found: u32 },

    #[error("message of {len} blocks exceeds session capacity r={max}")]
    LengthOverflow { len: usize, max: usize },

    #[error("empty message")]
    EmptyMessage,

    /// The oracle does not behave like a fixed-clock machine.
    #[error("oracle-model violation: {0}")]
    OracleModel(String),

    /// No candidate satisfies the supplied observations.
    #[error("inconsistent observations: {0}")]
    Inconsistent(String),

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("backend mismatch: value `{value}` is not a {expected} value")]
    BackendMismatch { value: String, expected: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
