use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cell {cell:?} for dimensions {dims:?}")]
    InvalidCell { cell: Vec<usize>, dims: Vec<usize> },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported dimension: expected 3 variables, got {0}")]
    UnsupportedDimension(usize),

    #[error("counts must be nonnegative integers (cell {index} holds {value})")]
    NonIntegerCounts { index: usize, value: f64 },

    #[error("{what} must be positive (entry {index} is {value})")]
    NonPositive {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("log of zero marginal probability in marginal row {row}")]
    LogOfZero { row: usize },

    #[error("constrained parameter {label} is {value:e}, expected zero")]
    ConstraintViolated { label: String, value: f64 },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid marginal set: {0}")]
    InvalidMarginals(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("unknown model `{label}`; valid labels: {}", valid.join(", "))]
    UnknownModel { label: String, valid: Vec<String> },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::UnknownModel { .. } => ErrorKind::Usage,
            Error::LogOfZero { .. } | Error::ConstraintViolated { .. } | Error::Internal(_) => {
                ErrorKind::Numerical
            }
            _ => ErrorKind::Data,
        }
    }
}
