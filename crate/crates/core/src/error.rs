//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a domain invariant (range, finiteness, shape).
    #[error("invalid {what}: {message}")]
    Invalid { what: &'static str, message: String },

    /// Two operands have incompatible shapes or dimensions.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A serialized document failed to parse or validate.
    /// `path` points at the offending field, e.g. `strokes[2].color[0]`.
    #[error("malformed document at {path}: {message}")]
    Document { path: String, message: String },

    /// The optimizer produced a non-finite loss.
    #[error("non-finite loss at step {step}: {message}")]
    NonFiniteLoss { step: u64, message: String },
}

impl Error {
    pub fn invalid(what: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            message: message.into(),
        }
    }

    pub fn document(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Document {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
