use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("base p = {0} is outside the supported range 2..=16")]
    InvalidBase(usize),
    #[error("malformed index: {0}")]
    MalformedIndex(String),
    #[error("{0} is not a chaos index (it has no nonzero digit)")]
    NotAChaosIndex(usize),
    #[error("level mismatch: {left:?} vs {right:?} (p, level)")]
    LevelMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("no chaos terms of order {d} with positions 0..={n_max}")]
    EmptyIndexSet { d: usize, n_max: usize },
    #[error("level {have} is insufficient, need at least {need}")]
    InsufficientLevel { have: usize, need: usize },
    #[error("coefficient a[{index}] has modulus {modulus} > 1")]
    CoefficientOutOfRange { index: usize, modulus: f64 },
    #[error("exponent {value} at position {index} is outside 1..p-1")]
    ExponentOutOfRange { index: usize, value: usize },
    #[error("interpolation system for order {d} is ill-conditioned (residual {residual:e})")]
    IllConditionedSystem { d: usize, residual: f64 },
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("invalid exponent q = {0}; must be positive")]
    InvalidExponent(f64),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("combinatorial guard exceeded: {count} > {limit}")]
    CombinatorialBlowup { count: u128, limit: u128 },
    #[error("p^level = {p}^{level} exceeds the cell limit {limit}")]
    TooManyCells {
        p: usize,
        level: usize,
        limit: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
