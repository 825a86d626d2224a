use thiserror::Error;

use crate::sosdsl::Diagnostic;

/// Failures surfaced by library operations.
///
/// Validation problems are not errors: validators return their findings as data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("{} parse error(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Parse(Vec<Diagnostic>),

    #[error("resource budget exceeded at step {step}: {what} (limit {limit})")]
    Budget { step: usize, what: String, limit: usize },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
