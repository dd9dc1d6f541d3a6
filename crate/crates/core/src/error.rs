use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} in {simplex} is out of range for {num_vertices} vertices")]
    IndexOutOfRange {
        simplex: String,
        index: usize,
        num_vertices: usize,
    },

    #[error("duplicate simplex {0}")]
    Duplicate(String),

    #[error("{simplex} references missing face {face}")]
    MissingFace { simplex: String, face: String },

    #[error("malformed simplex {simplex}: {reason}")]
    Malformed { simplex: String, reason: String },

    #[error("invalid order/variant: {0}")]
    InvalidOrder(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("harmonic step epsilon = {epsilon} is outside the stable range (0, {bound})")]
    UnstableStep { epsilon: f64, bound: f64 },

    #[error("no convergence after {iterations} iterations (final relative change {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("ill-conditioned regressor (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_check(what: impl Into<String>, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what: what.into(),
            expected,
            found,
        })
    }
}
