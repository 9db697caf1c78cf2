use thiserror::Error;

#[derive(Debug, Error)]
pub enum QdError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("degenerate cut: gap {gap:.3e} between levels {index} and {next} is below {threshold:.1e}")]
    DegenerateCut {
        index: usize,
        next: usize,
        gap: f64,
        threshold: f64,
    },
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("resource limit: dimension {dim} exceeds cap {cap}")]
    ResourceLimit { dim: u128, cap: u128 },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

impl QdError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        QdError::InvalidArgument(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        QdError::NumericFailure(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        QdError::PreconditionViolation(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        QdError::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable short name of the error category, used in reports and the C API.
    pub fn kind(&self) -> &'static str {
        match self {
            QdError::InvalidArgument(_) => "invalid-argument",
            QdError::NumericFailure(_) => "numeric-failure",
            QdError::DegenerateCut { .. } => "degenerate-cut",
            QdError::PreconditionViolation(_) => "precondition-violation",
            QdError::ResourceLimit { .. } => "resource-limit",
            QdError::Io { .. } => "io-error",
            QdError::Parse(_) => "parse-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, QdError>;
