use thiserror::Error;

/// Failures raised by the algebra layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("polynomials live over different variable sets")]
    VarSetMismatch,
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("division is not exact")]
    NotDivisible,
    #[error("both inputs are constant in '{0}'; nothing to eliminate")]
    NothingToEliminate(String),
}

impl PolyError {
    pub fn is_resource(&self) -> bool {
        matches!(self, PolyError::Resource(_))
    }
}

/// Top-level error for the engine, the checker and the command line.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("invalid input: {0}")]
    Usage(String),
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
