use thiserror::Error;

/// Errors raised by body evaluation, the fiber engines and file handling.
#[derive(Debug, Error)]
pub enum FiberError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("slice at x = {x:?} is empty or degenerate (x not strictly inside the projection)")]
    EmptySlice { x: Vec<f64> },

    #[error("fiber engine supports n in {{1, 2}}, got n = {0}")]
    UnsupportedDimension(usize),

    #[error("body is not curved (minimum tangential Hessian eigenvalue {min_eigenvalue:.3e})")]
    NotCurved { min_eigenvalue: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("invalid discotope: {0}")]
    InvalidDiscotope(String),

    #[error("no boundary crossing along ray up to t = {bound}")]
    UnboundedRay { bound: f64 },

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("method `{method}` is not applicable to this body; applicable: {}", applicable.join(", "))]
    Method {
        method: String,
        applicable: Vec<String>,
    },

    #[error("too few samples: {got} (at least {min} required)")]
    TooFewSamples { got: usize, min: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FiberError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(FiberError::Dimension { expected, got })
    }
}
