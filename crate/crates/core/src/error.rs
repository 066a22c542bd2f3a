use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("n < 2: an instance needs at least two bidders, got {0}")]
    TooFewBidders(usize),

    #[error("length mismatch: {valuations} valuations but {alphas} alphas")]
    LengthMismatch { valuations: usize, alphas: usize },

    #[error("alpha must be positive: alphas[{index}] = {value}")]
    NonPositiveAlpha { index: usize, value: f64 },

    #[error("valuation must be non-negative: valuations[{index}] = {value}")]
    NegativeValuation { index: usize, value: f64 },

    #[error("{field}[{index}] is not finite")]
    NonFinite { field: &'static str, index: usize },

    #[error("bidder index {index} out of range for {n} bidders")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("allocation has {got} entries, instance has {expected} bidders")]
    AllocationArity { expected: usize, got: usize },

    #[error("allocation x[{index}] = {value} outside [0, 1]")]
    FractionOutOfRange { index: usize, value: f64 },

    #[error("allocation sums to {0}, more than one unit")]
    OverAllocated(f64),

    #[error("valuations must be sorted in descending order with the dummy last")]
    Unsorted,

    #[error("uniform price needs at least two bidders in the prefix, got {0}")]
    PrefixTooShort(usize),

    #[error("quadrature on [{a}, {b}] did not converge within depth {depth}")]
    Quadrature { a: f64, b: f64, depth: u32 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("oracle supports 2..=5 bidders, got {0}")]
    OracleTooLarge(usize),

    #[error("oracle resolution must be at least 10, got {0}")]
    ResolutionTooSmall(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
