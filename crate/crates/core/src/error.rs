use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument lies outside the domain of the function.
    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    /// Malformed structured input (point systems, polygons, parameters).
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Evaluation at a pole or at coincident points.
    #[error("singular evaluation: {0}")]
    Singular(String),
    /// A marked point is not strictly inside its domain.
    #[error("marked point {0} is not interior to the domain")]
    NotInterior(num_complex::Complex64),
    /// Iterative or Monte Carlo procedure did not produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The operation is not defined for this kind of domain.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
