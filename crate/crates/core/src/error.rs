use std::io;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("sentence {sentence_id}: {message}")]
    Validation {
        sentence_id: String,
        message: String,
    },

    #[error("unknown subtag {0}")]
    UnknownSubtag(String),

    #[error("tag {0} has no gender subtag")]
    NoGender(String),

    #[error("constraint error at position {position}: {message}")]
    Constraint { position: usize, message: String },

    #[error("inconsistent factor graph: all-zero belief at variable {0}")]
    Inconsistent(usize),

    #[error("assignment space of {0} entries exceeds the enumeration limit")]
    SpaceTooLarge(u128),

    #[error("data error: {0}")]
    Data(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model file error: {0}")]
    ModelFile(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
