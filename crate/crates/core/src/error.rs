use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid split: n_left = {n_left} must lie in 1..={max} for n = {n}", max = .n - 1)]
    InvalidSplit { n_left: usize, n: usize },

    #[error(
        "target recovery fraction {target} unreachable: fraction {best} at n = {n_hi} (bracket cap {cap})"
    )]
    UnreachableTarget {
        target: f64,
        best: f64,
        n_hi: usize,
        cap: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
