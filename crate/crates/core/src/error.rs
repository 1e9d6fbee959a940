use thiserror::Error;

use crate::quad::QuadResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),

    #[error("incompatible dimensions: {from} vs {to}")]
    IncompatibleDimensions { from: String, to: String },

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("quadrature did not converge after {} evaluations (best {:e} +/- {:e})", best.evaluations, best.value, best.error_estimate)]
    NonConvergence { best: QuadResult },

    #[error("semi-infinite tail bound not reached before omega = {omega_max:e} (accumulated {accumulated:e})")]
    TailNotReached { omega_max: f64, accumulated: f64 },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Innermost error once context layers are removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self.root(), Error::NonConvergence { .. } | Error::TailNotReached { .. })
    }
}
