use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
///
/// Model-level diagnoses (a collection that is not ERBR-consistent, a support
/// function that is not power additive) are ordinary return values, not errors.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs do not fit together: mismatched state spaces, overlapping bins,
    /// wrong vector lengths, empty collections.
    #[error("structural error: {0}")]
    Structural(String),

    /// A numeric argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A partition required by the support construction is not in the collection.
    #[error("missing partition {needed} (required to identify event {event})")]
    MissingPartition { needed: String, event: String },

    /// Alternative chains to the same event disagree beyond the tolerance.
    #[error("inconsistent support for event {event}: chains disagree by {spread:e} in log space")]
    Inconsistent { event: String, spread: f64 },

    #[error("recovery equation has no sign change on [{lambda_min}, {lambda_max}] (F = {f_low:.6} .. {f_high:.6})")]
    NoSolution {
        lambda_min: f64,
        lambda_max: f64,
        f_low: f64,
        f_high: f64,
    },

    /// The data carry no information about the requested parameter.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A binary partition with an even base cannot reproduce an uneven report.
    #[error("no exact fit: base probability is 0.5 but the empirical mean is {empirical}")]
    NoExactFit { empirical: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
