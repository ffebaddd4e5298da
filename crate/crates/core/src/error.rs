use thiserror::Error;

use crate::graph::{EdgeId, NodeId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node {0} is out of range for a graph with {1} nodes")]
    NodeOutOfRange(NodeId, usize),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("protected edge {edge} carries perturbation {value}")]
    ProtectedEdgePerturbed { edge: EdgeId, value: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: {msg}")]
    Validation { line: usize, msg: String },

    #[error("LP solver: {0}")]
    Solver(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
