use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented bound. `field` is a dotted path such as
    /// `env.temperature_c`.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// A numerical procedure failed to meet its convergence contract.
    #[error("numerical diagnostic: {0}")]
    Numerical(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Prefixes the field path of a validation error, leaving other variants untouched.
    pub fn within(self, prefix: &str) -> Self {
        match self {
            Error::Validation { field, reason } => Error::Validation {
                field: format!("{prefix}.{field}"),
                reason,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks `lo <= value <= hi`, reporting the violated bound.
pub(crate) fn check_range(field: &str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::validation(field, format!("must be finite, got {value}")));
    }
    if value < lo {
        return Err(Error::validation(field, format!("{value} is below the minimum {lo}")));
    }
    if value > hi {
        return Err(Error::validation(field, format!("{value} is above the maximum {hi}")));
    }
    Ok(())
}

pub(crate) fn check_positive(field: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::validation(
            field,
            format!("must be positive and finite, got {value}"),
        ));
    }
    Ok(())
}
