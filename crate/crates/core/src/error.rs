use thiserror::Error;

use crate::linalg::LinalgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    /// A strategy component violates one of its invariants. `field` is a
    /// slash-separated path into the strategy JSON, e.g. `unitaries/011`.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("classical search space too large: {encodings} encodings for n={n}, m={m} (limit {limit}); use smaller n or m")]
    SearchSpace {
        n: u32,
        m: u32,
        encodings: f64,
        limit: u64,
    },
    #[error("malformed classical strategy: {0}")]
    ClassicalTable(String),
    #[error("noise parameter {0} outside [0, 1]")]
    NoiseOutOfRange(f64),
    #[error("strategy JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
