use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the modelling pipeline.
///
/// The variants are grouped by how a caller is expected to react: input
/// problems (`Parse`, `Validation`, `OutOfRange`, `Io`) versus numerical
/// breakdowns (`Numerical`, `BvpNotConverged`, `BvpDiverged`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("{quantity} {value} is outside the tabulated range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "backward-pump relaxation did not converge after {iterations} iterations \
         (last residual {residual_db:.3e} dB)"
    )]
    BvpNotConverged { iterations: usize, residual_db: f64 },

    #[error(
        "backward-pump relaxation diverged at iteration {iteration} \
         (residual {residual_db:.3e} dB); try a smaller damping factor"
    )]
    BvpDiverged { iteration: usize, residual_db: f64 },

    #[error("span {span}: {source}")]
    Span {
        span: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical(_) | Error::BvpNotConverged { .. } | Error::BvpDiverged { .. } => {
                true
            }
            Error::Span { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
