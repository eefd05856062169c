use thiserror::Error;

/// Errors raised by the detection library.
#[derive(Debug, Error)]
pub enum JaddError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("solver diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("restricted least-squares system is rank deficient ({columns} columns, rank {rank})")]
    RankDeficient { columns: usize, rank: usize },

    #[error("matrix factorization failed: {0}")]
    Factorization(String),

    #[error("slot {slot}: {source}")]
    Slot {
        slot: usize,
        #[source]
        source: Box<JaddError>,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, JaddError>;

pub(crate) fn invalid(msg: impl Into<String>) -> JaddError {
    JaddError::InvalidInput(msg.into())
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(JaddError::DimensionMismatch { what, expected, got })
    }
}
