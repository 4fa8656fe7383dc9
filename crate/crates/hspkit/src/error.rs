use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed signature token `{0}`")]
    MalformedToken(String),
    #[error("empty signature")]
    EmptySignature,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error("factor {prime}^{exponent} does not fit in 64 bits")]
    FactorTooLarge { prime: u64, exponent: u32 },
    #[error("malformed element `{0}`")]
    MalformedElement(String),
    #[error("element has {got} coordinates, signature has {want} factors")]
    LengthMismatch { got: usize, want: usize },
    #[error("enumeration cap {cap} exceeded")]
    CapExceeded { cap: u64 },
    #[error("factor index {index} out of range (signature has {len} factors)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("expected a single-factor signature, got {0} factors")]
    NotCyclic(usize),
    #[error("balance parameter must be at least 1")]
    ZeroBalance,
    #[error("subgroup rank must satisfy 0 <= k <= n")]
    BadSubgroupRank,
    #[error("lower bound is vacuous: |G|/|H| < 2")]
    VacuousLowerBound,
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("scaling fit needs at least 4 points")]
    TooFewPoints,
    #[error("scaling fit is degenerate: all x values are equal")]
    DegenerateFit,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("solver disagrees with brute force on instance {0}")]
    CrossCheckMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
