use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no points provided")]
    EmptyInput,

    #[error("no centers provided")]
    EmptyCenters,

    #[error("dimension mismatch: expected dim={expected}, got dim={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension must be >= 1")]
    ZeroDimension,

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("p={p} out of range [1, {n}]")]
    POutOfRange { p: u64, n: u64 },

    #[error("k={k} out of range [1, {n}]")]
    KOutOfRange { k: usize, n: usize },

    #[error("invalid epsilon {0}")]
    InvalidEpsilon(f64),

    #[error("invalid weight at position {index}: {reason}")]
    InvalidWeight { index: usize, reason: &'static str },

    #[error("weight vector has length {got}, expected {expected}")]
    WeightLength { expected: u64, got: usize },

    #[error("coordinates are not sorted ascending at position {index}")]
    NotSorted { index: usize },

    #[error("invalid threshold {0}")]
    InvalidThreshold(f64),

    #[error("interval plans do not partition the same points: {0}")]
    PlanMismatch(String),

    #[error("projection would create {count} lines, cap is {cap}")]
    TooManyLines { count: usize, cap: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
