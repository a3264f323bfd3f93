//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node id {id} is out of range for a graph on {n} nodes")]
    InvalidNode { id: u32, n: usize },

    #[error("self-loop on node {0} is not allowed in a simple digraph")]
    SelfLoop(u32),

    #[error("duplicate edge ({from}, {to})")]
    DuplicateEdge { from: u32, to: u32 },

    #[error("duplicate neighbor id {0} in value list")]
    DuplicateNeighbor(u32),

    #[error("subset of nodes must be nonempty")]
    EmptySubset,

    #[error(
        "graph on {n} nodes exceeds the enumeration limit {limit}; \
         the subset-pair scan costs on the order of 3^{n} states \
         (raise the limit explicitly to proceed)"
    )]
    EnumerationCap { n: usize, limit: usize },

    #[error("invalid switching schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid query time {0}: time must be nonnegative")]
    NegativeTime(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("edge list parse error at line {line}: {msg}")]
    EdgeListParse { line: usize, msg: String },

    #[error(
        "adversary set violates the declared threat scope \
         ({count} violation(s); first: {first})"
    )]
    ScopeViolation { count: usize, first: String },

    #[error("unknown preset '{0}' (known: prop1-two-clique, fig2-local, grow-k5, sec6-hub)")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
