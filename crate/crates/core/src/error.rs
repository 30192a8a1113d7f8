use thiserror::Error;

/// Errors produced by the model, the numerical operators and the drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least {min} cells, got {got}")]
    TooFewCells { got: usize, min: usize },

    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),

    #[error("operator requires {expected} layout")]
    LayoutMismatch { expected: &'static str },

    #[error("field `{field}` has length {got}, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("{0} supports periodic boundaries only")]
    UnsupportedBoundary(&'static str),

    #[error("scheme {scheme} cannot run on the {layout} layout")]
    SchemeLayout {
        scheme: &'static str,
        layout: &'static str,
    },

    #[error("non-finite value in `{field}` at index {index}")]
    NonFinite { field: &'static str, index: usize },

    #[error("no cell violates the {0} bound")]
    NoViolation(&'static str),

    #[error("reference field has zero norm")]
    ZeroNorm,

    #[error("Newton iteration did not converge after {iterations} iterations (|F| = {residual:e}, |F0| = {initial:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        initial: f64,
    },

    #[error("Jacobian is singular")]
    SingularJacobian,

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid run configuration: {0}")]
    InvalidSpec(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
