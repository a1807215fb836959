use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside the domain of the closest-point projection: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("mesh validation failed: {0}")]
    Mesh(String),

    #[error("could not locate fine vertex {vertex} on the coarse mesh (distance {distance:.3e})")]
    Location { vertex: usize, distance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("singular shifted system at quadrature node {node}: {reason}")]
    ShiftedSolve { node: i64, reason: String },

    #[error("non-finite value encountered at step {step}")]
    NonFinite { step: usize },

    #[error("unknown coefficient field `{0}`")]
    UnknownField(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }

    /// True for errors that stem from the numerics rather than from user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Factorization(_)
                | Error::ShiftedSolve { .. }
                | Error::NonFinite { .. }
                | Error::Eigen(_)
                | Error::Location { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
