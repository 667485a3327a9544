use thiserror::Error;

use crate::hypergraph::Side;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for {len} nodes")]
    NodeOutOfRange { index: usize, len: usize },

    #[error("hyperedge {0} is empty")]
    EmptyHyperedge(usize),

    #[error("{side} node {index} is isolated")]
    IsolatedNode { side: Side, index: usize },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} outside of [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("coarsening step does not match the fine graph: {0}")]
    InconsistentStep(String),

    #[error("coarsening made no progress on a graph with {n_left} left and {n_right} right nodes")]
    CoarseningStuck {
        n_left: usize,
        n_right: usize,
        /// The graph the sampler could not reduce, in JSON form.
        graph: String,
    },

    #[error("sampling did not reach {target} nodes within {cap} iterations (stuck at {reached})")]
    IterationCap {
        target: usize,
        cap: usize,
        reached: usize,
    },

    #[error("retry budget of {0} attempts exhausted")]
    RetriesExhausted(usize),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
