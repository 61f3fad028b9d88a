use thiserror::Error;

/// Errors surfaced by graph construction, oracles and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0} (need d >= 1)")]
    InvalidDimension(usize),
    #[error("invalid radii: {0}")]
    InvalidRadii(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("not an edge of the graph: ({0}, {1})")]
    NotAnEdge(usize, usize),
    #[error("enumeration budget exceeded: {what} = {got}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("empty sample stream")]
    EmptyStream,
    #[error("inconsistent backbone: {0}")]
    InconsistentBackbone(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
