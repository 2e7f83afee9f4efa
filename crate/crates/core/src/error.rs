use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge list is empty")]
    EmptyGraph,

    #[error("edge ({u}, {v}) has non-positive weight {weight}")]
    NonPositiveWeight { u: usize, v: usize, weight: f64 },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("vertex {vertex} out of range for a graph with {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },

    #[error("graph is disconnected: {components} components (sizes {sizes:?})")]
    Disconnected { components: usize, sizes: Vec<usize> },

    #[error("radius {requested} exceeds the boundary-safe bound {safe}")]
    UnsafeRadius { requested: f64, safe: f64 },

    #[error("window is empty: {0}")]
    EmptyWindow(String),

    #[error("generator budget exceeded: {family} would have {predicted} vertices (limit {limit})")]
    BudgetExceeded { family: String, predicted: u128, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
