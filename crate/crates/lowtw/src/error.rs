use thiserror::Error;

/// Errors raised by graph, decomposition and algebra operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {vertex} not allowed in a simple graph")]
    SelfLoop { vertex: usize },
    #[error("duplicate edge {u}-{v}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("input graph is not a tree")]
    NotATree,
    #[error("vertex set is not connected")]
    DisconnectedSet,
    #[error("empty input")]
    EmptyInput,
    #[error("measure is zero everywhere")]
    ZeroMeasure,
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("index {index} out of range ({limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("determinant requested on a non-square matrix ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("division by zero in the field")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no prime in the requested range")]
    EmptyPrimeRange,
    #[error("sets S and T overlap at vertex {vertex}")]
    TerminalOverlap { vertex: usize },
    #[error("arc from source side to sink side at ({u},{v})")]
    ArcFromSourceToSink { u: usize, v: usize },
    #[error("invalid flow: {0}")]
    InvalidFlow(String),
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("terminals must be distinct and non-adjacent")]
    BadTerminals,
    #[error("measure exceeds the per-piece threshold at vertex {vertex}")]
    HeavyVertex { vertex: usize },
    #[error("randomized procedure failed after retries (singular sample)")]
    RandomFailure,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),
}
