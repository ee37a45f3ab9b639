use thiserror::Error;

/// Errors raised while building graphs, generators and states, or while
/// propagating them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for {n_vertices} vertices")]
    IndexOutOfRange { index: usize, n_vertices: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({u}, {v}) has non-positive weight {weight}")]
    NonpositiveWeight { u: usize, v: usize, weight: f64 },

    #[error("invalid line length {0}: must be odd and at least 3")]
    InvalidLineLength(usize),

    #[error("invalid rate {0}: must be positive and finite")]
    InvalidRate(f64),

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("generator is not symmetric (max asymmetry {0:e})")]
    NonHermitianSource(f64),

    #[error("omega {0} outside [0, 1]")]
    OmegaOutOfRange(f64),

    #[error("axiom {0} is not one of 1..=6")]
    UnknownAxiom(u8),

    #[error("axiom {axiom} requires distinct vertices, got m={m}, n={n}, l={l}")]
    IndicesNotDistinct { axiom: u8, m: usize, n: usize, l: usize },

    #[error("vertex {0} is isolated and hold < 1")]
    IsolatedVertexWithoutHold(usize),

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochasticMatrix(String),

    #[error("Kraus set is not complete (deviation {0:e})")]
    IncompleteKrausSet(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error(
        "state invariant violated: trace drift {trace_drift:e}, hermiticity {hermiticity:e}, \
         min eigenvalue {min_eigenvalue:e}"
    )]
    StateInvariantViolated {
        trace_drift: f64,
        hermiticity: f64,
        min_eigenvalue: f64,
    },

    #[error("solver tolerance not met: {0}")]
    ToleranceNotMet(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph is not a line graph")]
    NonLineGraph,
}

pub type Result<T> = std::result::Result<T, Error>;
