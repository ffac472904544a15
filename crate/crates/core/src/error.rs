use thiserror::Error;

/// Errors raised by the word, algebra, matrix and group machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("generator {0} has no value in the assignment")]
    MissingGenerator(u32),
    #[error("elements live in different ambient groups")]
    AmbientMismatch,
    #[error("support of {needed} words exceeds the cap of {cap}")]
    SupportCapExceeded { cap: usize, needed: usize },
    #[error("matrix is not unitary: deviation {deviation:e} exceeds {tol:e}")]
    NotUnitary { deviation: f64, tol: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("numerically ambiguous element: distance {distance:e} from a known element")]
    AmbiguousMerge { distance: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
