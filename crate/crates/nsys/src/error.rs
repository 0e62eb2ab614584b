//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A query landed outside a function's domain.
    #[error("position {q} outside domain [0, {end}]")]
    OutOfDomain { q: String, end: String },

    /// Malformed input (text, JSON, or a structurally broken value).
    #[error("cannot parse {what}")]
    Parse { what: String },

    /// A construction could not proceed; `epoch` localizes the failure.
    #[error("build failed at epoch {epoch}: {reason}")]
    Build { epoch: usize, reason: String },

    /// Precondition violation on an operation argument.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operation is defined only for a different dimension.
    #[error("unsupported dimension n = {n}: {what}")]
    Unsupported { n: usize, what: String },

    /// A configured resource budget would be exceeded.
    #[error("budget exceeded: {what} requires {required}, budget is {budget}")]
    Budget {
        what: String,
        required: String,
        budget: String,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
