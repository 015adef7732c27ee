use crate::graph::VertexId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("self-loop on vertex {0} is not allowed")]
    SelfLoop(VertexId),
    #[error("identity spaces do not match: expected {expected}, got {got}")]
    SpaceMismatch { expected: &'static str, got: &'static str },
    #[error("no mapping for vertex {0}")]
    MissingMapping(VertexId),
    #[error("mapping is not injective at {0}")]
    DuplicateMapping(VertexId),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
