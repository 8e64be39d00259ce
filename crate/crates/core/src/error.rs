use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tensor contains a non-finite entry at linear index {0}")]
    NonFinite(usize),

    #[error("matrix is not orthogonal (max deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("SVD failed to converge on transform-domain slice {0}")]
    SvdFailed(usize),

    #[error("linear solve failed on transform-domain slice {0}")]
    SolveFailed(usize),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("non-finite iterate `{variable}` at iteration {iteration}")]
    Diverged { variable: &'static str, iteration: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
