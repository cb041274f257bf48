use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fields live on different domains")]
    DomainMismatch,

    #[error("operation not supported on the {0} backend")]
    UnsupportedBackend(&'static str),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("right-hand side is not solvable: weighted mean {mean:e} exceeds tolerance {tol:e}")]
    Solvability { mean: f64, tol: f64 },

    #[error("{what} failed to converge after {iterations} iterations")]
    SolverFailure { what: String, iterations: usize },

    #[error("time step produced non-finite values at t = {t}")]
    StepFailure { t: f64 },

    #[error("wrong topology: expected {expected}, found chi = {found}")]
    Topology { expected: String, found: i64 },

    #[error("state is not stationary enough: sup|R - r| = {sup:e} exceeds {limit:e}")]
    NonStationary { sup: f64, limit: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
