use thiserror::Error;

/// Errors raised by construction, validation and numerical routines.
///
/// Algorithmic failures (an algorithm returning "failure") are not errors;
/// they are reported through [`crate::algorithms::Outcome`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0},{1}}}")]
    DuplicateEdge(usize, usize),
    #[error("source and target coincide ({0})")]
    EqualTerminals(usize),
    #[error("bit index {index} out of range (m = {m})")]
    BitOutOfRange { index: usize, m: usize },
    #[error("edge {{{0},{1}}} not in graph")]
    UnknownEdge(usize, usize),
    #[error("vertex {0} is inactive")]
    InactiveVertex(usize),
    #[error("cannot remove terminal vertex {0}")]
    RemoveTerminal(usize),
    #[error("input string has length {got}, expected {expected}")]
    InputLength { got: usize, expected: usize },
    #[error("free-bit mask conflicts with x at bit {0}")]
    FreeBitConflict(usize),
    #[error("size guard exceeded: {what} has {size}, limit {limit}")]
    SizeGuard { what: &'static str, size: usize, limit: usize },
    #[error("terminals are disconnected")]
    Disconnected,
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("not a 1-input: residual {0:e}")]
    NotOneInput(f64),
    #[error("ill-posed problem: {0}")]
    IllPosed(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed term: {0}")]
    MalformedTerm(String),
    #[error("infeasible family parameters: {0}")]
    Infeasible(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
