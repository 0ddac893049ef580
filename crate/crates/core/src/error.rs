use crate::eigen::SpectralResult;

/// Errors raised by the numerical kernels and the experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The eigensolver ran out of iterations; the partial result is attached
    /// with `converged == false`.
    #[error("eigensolver did not converge after {iterations} iterations (max residual {residual:.3e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        partial: Box<SpectralResult>,
    },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(invalid(format!("{what}: non-finite sample at index {i}"))),
        None => Ok(()),
    }
}
