use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("non-finite value {value} at cell {cell}")]
    NonFinite { cell: usize, value: f64 },

    #[error("expected {expected} cell values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("weight must be strictly positive, found {value} at cell {cell}")]
    NonPositiveWeight { cell: usize, value: f64 },

    #[error("power weight exponent {0} is not locally integrable (need a > -1)")]
    NonIntegrablePower(f64),

    #[error("incompatible operands: {0}")]
    Incompatible(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("complementary function at s = {s} peaks at boundary index {boundary_index} of the Legendre grid")]
    ConjugateUnbracketed { s: f64, boundary_index: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("numerical failure in trial {trial} ({digest}): {reason}")]
    Numerical {
        trial: usize,
        digest: String,
        reason: String,
    },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
