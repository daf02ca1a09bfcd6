use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("point ({x}, {y}) lies outside the domain of {what}")]
    DomainViolation { what: String, x: f64, y: f64 },

    #[error("non-finite value while evaluating {what} at ({x}, {y})")]
    NonFinite { what: String, x: f64, y: f64 },

    #[error("metric {chart} is degenerate at ({x}, {y})")]
    Degenerate { chart: String, x: f64, y: f64 },

    #[error("signature check failed for {chart}: {message}")]
    Signature { chart: String, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("not a Killing field of {chart}: Lie derivative {defect:.3e} exceeds {tol:.1e}")]
    NotKilling { chart: String, defect: f64, tol: f64 },

    #[error("unknown chart `{name}`; available: {available}")]
    UnknownChart { name: String, available: String },

    #[error("chart description: {0}")]
    Format(String),

    #[error("zero tangent vector")]
    ZeroVector,
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
