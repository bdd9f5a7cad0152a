use thiserror::Error;

use crate::wigner::WignerField;

/// Errors produced by the calculators and the phase-space engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration document could not be parsed.
    #[error("parse error{}: {message}", .record.map(|i| format!(" in record {i}")).unwrap_or_default())]
    Parse {
        record: Option<usize>,
        message: String,
    },

    /// A value violates a type invariant.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    /// A formula was evaluated outside its domain of validity.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown body `{0}`")]
    UnknownBody(String),

    /// The integrator produced a non-finite value. The last finite field is
    /// kept for post-mortem inspection.
    #[error("numerical failure at t = {time:e}: {message}")]
    Numerical {
        time: f64,
        message: String,
        last_good: Option<Box<WignerField>>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    /// Prefix a domain or validation error with the context it arose in.
    pub fn context(self, ctx: &str) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
            Error::Validation { field, message } => Error::Validation {
                field,
                message: format!("{ctx}: {message}"),
            },
            other => other,
        }
    }
}

/// Reject non-finite or non-positive values.
pub(crate) fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and >= 0, got {value}")))
    }
}
