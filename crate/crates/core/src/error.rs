use thiserror::Error;

/// Structural problems with a network description.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("self-edge at vertex {0}")]
    SelfEdge(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex index {index} out of range 1..={n}")]
    OutOfRange { index: i64, n: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("graph error: {0}")]
    Graph(#[from] GraphError),
    #[error("generation failed after {attempts} attempts (n = {n}, q = {q})")]
    Generation { n: usize, q: f64, attempts: usize },
    #[error("no dominating set with at most {budget} vertices")]
    EmptyCollection { budget: usize },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("root solve failed: {0}")]
    RootSolve(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("no certificate after {cuts} cutting-plane iterations")]
    IterationLimit { cuts: usize },
    #[error("oracle scope exceeded: {0}")]
    Scope(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
