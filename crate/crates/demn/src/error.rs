//! Error type shared by every module in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions of an operand do not match what the operation requires.
    #[error("{op}: shape mismatch ({detail})")]
    Shape { op: &'static str, detail: String },

    /// A vector is too close to zero to normalize or encode.
    #[error("{op}: degenerate input (norm {norm:.3e})")]
    Degenerate { op: &'static str, norm: f64 },

    /// A loss or gradient became non-finite during training.
    #[error("training diverged: {0}")]
    Divergence(String),

    /// The finite-difference oracle could not produce a gradient estimate.
    #[error("gradient oracle: {0}")]
    Oracle(String),

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown episode id `{0}`")]
    MissingEpisode(String),

    #[error("retrieval error: {0}")]
    Retrieval(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// An API contract was violated by the caller (wrong counts, bad labels).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Shape {
            op,
            detail: detail.into(),
        }
    }
}
