use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a map (e.g. an area radius at or inside the horizon).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A geometric admissibility condition does not hold for the configured background.
    #[error("condition violated: {0}")]
    ConditionViolation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("insufficient accuracy: {0}")]
    Accuracy(String),

    #[error("numerical blow-up detected at t = {t}")]
    Blowup { t: f64 },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("iteration did not converge: {0}")]
    Convergence(String),

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("observer `{name}` failed at t = {t}: {source}")]
    Observer {
        name: String,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
