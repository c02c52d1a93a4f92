use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,
    #[error("row {row} has {len} entries, expected {dim}")]
    RaggedRow { row: usize, len: usize, dim: usize },
    #[error("entry ({row},{col}) = {value} is not a finite nonnegative number")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("weight {index} must be positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("{sets} sets but {weights} weights")]
    WeightCount { sets: usize, weights: usize },
    #[error("operator set `{0}` is empty")]
    EmptySet(String),
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("permutation has length {got}, expected {expected}")]
    PermutationArity { expected: usize, got: usize },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("set index {index} out of range for {arity} sets")]
    SetIndex { index: usize, arity: usize },
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("unknown construction kind `{0}`")]
    UnknownConstruction(String),
    #[error("entry {entry} expects {expected} sets, instance has {got}")]
    Arity { entry: String, expected: usize, got: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("expression is not well typed: {0}")]
    IllTyped(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
