use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad classes of failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Precondition,
    Budget,
    Invariant,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("(0,0) is not a slope")]
    ZeroVector,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("determinant is {0}, expected 1")]
    Determinant(String),
    #[error("{0} is an endpoint of the edge")]
    EndpointCollision(String),
    #[error("degenerate interval ({0}, {0})")]
    DegenerateInterval(String),
    #[error("{0} is an endpoint of the interval, neighbor set is infinite")]
    UnboundedNeighbors(String),
    #[error("{0} and {1} are not adjacent")]
    NotAdjacent(String, String),
    #[error("continued fraction depth {requested} exceeds available depth {available}")]
    DepthExceeded { requested: usize, available: usize },
    #[error("no stabilization within depth budget: {0}")]
    NotStabilized(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant breach: {0}")]
    Invariant(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DepthExceeded { .. } | Error::NotStabilized(_) | Error::Budget(_) => {
                ErrorKind::Budget
            }
            Error::Invariant(_) => ErrorKind::Invariant,
            _ => ErrorKind::Precondition,
        }
    }
}
