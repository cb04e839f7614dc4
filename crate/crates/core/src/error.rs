use std::io;

use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    Bounds { vertex: usize, n: usize },

    #[error("vertex {0} has no neighbors")]
    NoNeighbors(VertexId),

    #[error("problem size {size} exceeds the limit of {limit} for {what}")]
    Capacity {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("graph is not unweighted regular: vertex {vertex} {reason}")]
    RegularityViolation { vertex: VertexId, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("opinion sampler exceeded its query budget in all {attempts} attempts")]
    BudgetExhausted { attempts: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
