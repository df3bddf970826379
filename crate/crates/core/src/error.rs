use thiserror::Error;

/// Failures raised by the library. Numerical diagnostics that are data
/// (residuals, tail estimates) are returned in report structs instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("frequency {omega} lies outside the tabulated range [{lo}, {hi}]")]
    OutOfGrid { omega: f64, lo: f64, hi: f64 },

    #[error("integral does not converge: {0}")]
    Divergent(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(
        "coupling fails the diagonalizability condition (zero-mode integral {integral} exceeds omega0^2 = {omega0_sq})"
    )]
    NotDiagonalizable { integral: f64, omega0_sq: f64 },

    #[error("fit degenerate: {0}")]
    FitDegenerate(String),

    #[error("integration unstable: relative energy drift {drift:e} at t = {t}")]
    Unstable { drift: f64, t: f64 },

    #[error("wrong reservoir condition kind: expected {expected}")]
    WrongConditionKind { expected: &'static str },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::Parse(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
