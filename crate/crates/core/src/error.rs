use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("duplicate points {first} and {second}")]
    DuplicatePoints { first: usize, second: usize },

    #[error("matrix is singular (zero pivot at index {pivot})")]
    Singular { pivot: usize },

    #[error("sparse solve failed: relative residual {residual:.3e} after refinement")]
    SolveAccuracy { residual: f64 },

    #[error("eigenvalue iteration failed to converge: {0}")]
    NoConvergence(String),

    #[error("polynomial basis construction failed: {0}")]
    Basis(String),

    #[error("stencil {stencil} failed: {reason}; points: {points:?}")]
    Stencil {
        stencil: usize,
        reason: String,
        points: Vec<[f64; 3]>,
    },

    #[error("node sampling failed: {0}")]
    Sampling(String),

    #[error("time integration diverged at step {step} (t = {t})")]
    Divergence { step: usize, t: f64 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
