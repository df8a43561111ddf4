use thiserror::Error;

/// Errors shared across the sampling, relaxation, and verification modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("weights must be non-empty")]
    EmptyWeights,
    #[error("weight at index {0} is {1}, expected a finite nonnegative value")]
    InvalidWeight(usize, f64),
    #[error("all weights are zero, normalizer must be positive")]
    ZeroNormalizer,
    #[error("index {index} out of range for {n} items")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("duplicate index {0} in sample")]
    DuplicateIndex(usize),
    #[error("subset size k={k} exceeds n={n}")]
    KTooLarge { k: usize, n: usize },
    #[error("k={k} exceeds the {positive} strictly positive weights")]
    NotEnoughPositiveWeights { k: usize, positive: usize },
    #[error("enumeration cost {cost:.0} exceeds limit {limit:.0}")]
    EnumerationLimit { cost: f64, limit: f64 },
    #[error("invalid subset mask: {0}")]
    InvalidMask(String),
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("score at index {0} is not finite")]
    NonFiniteScore(usize),
    #[error("distribution supports differ: {0}")]
    SupportMismatch(String),
    #[error("chi-square test needs at least two cells after merging")]
    DegenerateSupport,
    #[error("invalid counts: count={count} total={total}")]
    InvalidCounts { count: u64, total: u64 },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("training diverged at step {step}: loss is not finite")]
    Diverged { step: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
