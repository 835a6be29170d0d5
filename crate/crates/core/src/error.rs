use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what}: n = {n} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },

    #[error("event is not increasing")]
    NotIncreasing,

    #[error("not an antichain: {0} lies below {1}")]
    NotAntichain(String, String),

    #[error("invalid bitstring {0:?}")]
    InvalidBitstring(String),

    #[error("invalid rational {0:?}")]
    InvalidRational(String),

    #[error("probability out of range: {0}")]
    ProbabilityOutOfRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative weight at coordinate {0}")]
    NegativeWeight(usize),

    #[error("weighted {k}-out-of-{n} measure is not normalizable (every weight-{k} product is zero)")]
    NotNormalizable { k: usize, n: usize },

    #[error("measure is in generative mode; use the sampler")]
    GenerativeMeasure,

    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("odd dimension m = {0}; an even m is required")]
    OddDimension(usize),

    #[error("configuration {0} is not in the pair-alternating set")]
    NotPairAlternating(String),

    #[error("events are not orthogonal: {0}")]
    NotOrthogonal(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
