use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node count mismatch: {left} vs {right}")]
    NodeCountMismatch { left: usize, right: usize },

    #[error("directedness mismatch: {left_directed} vs {right_directed}")]
    DirectednessMismatch {
        left_directed: bool,
        right_directed: bool,
    },

    #[error("self-edge at node {node} is not allowed")]
    SelfEdge { node: usize },

    #[error("undirected adjacency is asymmetric at ({i}, {j})")]
    AsymmetricAdjacency { i: usize, j: usize },

    #[error("node index {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("need at least {min} snapshots, got {got}")]
    TooFewSnapshots { min: usize, got: usize },

    #[error("need at least 2 nodes, got {n}")]
    TooFewNodes { n: usize },

    #[error("nodal attributes have length {got}, expected {expected}")]
    AttributeLength { got: usize, expected: usize },

    #[error("formation network must contain the previous network (dyad {i}, {j})")]
    FormationNotSuperset { i: usize, j: usize },

    #[error("dissolution network must be contained in the previous network (dyad {i}, {j})")]
    DissolutionNotSubset { i: usize, j: usize },

    #[error("statistic {name} requires a directed network")]
    StatisticNeedsDirected { name: &'static str },

    #[error("statistic {name} requires nodal attributes")]
    StatisticNeedsAttributes { name: &'static str },

    #[error("statistic spec must have at least one term per model")]
    EmptyStatisticSpec,

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("linear solve failed in {context}: matrix not positive definite")]
    SolveFailed { context: &'static str },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    /// True for failures of numerical work (as opposed to input validation).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::SolveFailed { .. })
    }
}
