use thiserror::Error;

/// Errors produced by model construction, operators, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("problem has no fissile mode (x^T B x = {0:e})")]
    NonFissile(f64),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("no simple real dominant eigenvalue: {0}")]
    ComplexDominance(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
