use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("rank deficiency at column {column} (diagonal {diagonal:.3e} below tolerance {tolerance:.3e})")]
    RankDeficient {
        column: usize,
        diagonal: f64,
        tolerance: f64,
    },

    #[error("rank loss of the derivative image at iteration {iteration}: {source}")]
    RankLoss {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("iteration diverged at step {iteration} (non-finite state)")]
    Divergence {
        iteration: usize,
        last_finite: Vec<f64>,
    },

    #[error("all input vectors are zero")]
    EmptySpan,

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
