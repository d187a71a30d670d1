use thiserror::Error;

use crate::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("letter index 0 is not a generator")]
    ZeroLetter,
    #[error("letter a_{index} is out of range for rank {rank}")]
    LetterOutOfRange { index: usize, rank: usize },
    #[error("automorphism data is not a two-sided inverse pair: {0}")]
    NotInverse(String),
    #[error("identity element is not allowed here")]
    IdentityInput,
    #[error("negative scalar {0}")]
    NegativeScalar(Box<Rational>),
    #[error("edge path is not reduced: {0}")]
    NotReduced(String),
    #[error("zero current has no normalization")]
    ZeroCurrent,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid marking: {0}")]
    InvalidMarking(String),
    #[error("edge length must be positive: {0}")]
    NonPositiveLength(String),
    #[error("intersection routes disagree: route a = {route_a}, route b = {route_b}")]
    RouteDisagreement { route_a: Box<Rational>, route_b: Box<Rational> },
    #[error("constant {constant} is below the bounded back-tracking bound {bound}")]
    ConstantTooSmall { constant: Box<Rational>, bound: Box<Rational> },
    #[error("invalid graph map: {0}")]
    InvalidGraphMap(String),
    #[error("transition matrix is not primitive")]
    NotPrimitive,
    #[error("power iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("word length {length} exceeds the cap of {cap} letters; use a smaller n")]
    WordLengthCap { length: usize, cap: usize },
    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),
    #[error("only separating splittings are handled by refinement adjacency")]
    LoopKind,
    #[error("identical vertices do not span an edge")]
    SameVertex,
    #[error("vertex key collision: {0}")]
    KeyCollision(String),
    #[error("state cap of {cap} exceeded after exploring {explored} vertices")]
    StateCap { cap: usize, explored: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
