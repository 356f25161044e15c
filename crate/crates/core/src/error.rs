use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid halfspace: all coefficients are zero but 0 >= {0} is false")]
    InvalidHalfspace(String),
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("polytope is not full-dimensional")]
    NotFullDimensional,
    #[error("point is not on the simplex")]
    OffSimplex,
    #[error("value {0} is outside the utility range of the segment")]
    OutOfRange(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance generation failed after {attempts} attempts: {reason}")]
    GenerationExhausted { attempts: usize, reason: String },
    #[error("horizon of {0} rounds exhausted")]
    HorizonExceeded(u64),
    #[error("query for type {theta} timed out after {rounds} rounds")]
    QueryTimeout { theta: usize, rounds: u64 },
    #[error("hyperplane reconstruction failed: {0}")]
    ReconstructionFailure(String),
    #[error("feedback mode does not reveal follower types: {0}")]
    FeedbackMode(String),
    #[error("degenerate learner state: {0}")]
    DegenerateState(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
