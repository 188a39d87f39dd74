use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("not a probability distribution: {0}")]
    NotDistribution(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("polyhedron is empty")]
    EmptySet,

    #[error("polyhedron is unbounded")]
    Unbounded,

    #[error("linear program is unbounded: {0}")]
    UnboundedProgram(String),

    #[error("loss has redundant reports: {0:?}")]
    Redundant(Vec<String>),

    #[error("empty link envelope at u = {0}")]
    EmptyEnvelope(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("no candidate epsilon is valid")]
    NoValidEpsilon,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
