use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("probability {0} outside the open interval (0, 1)")]
    InvalidProbability(f64),
    #[error("SNR must be positive and finite, got {0}")]
    InvalidSnr(f64),
    #[error("rate {0} outside (0, 1]")]
    InvalidRate(f64),
    #[error("CRC width {0} not supported (use 0, 8, 16 or 32)")]
    InvalidCrcWidth(u32),
    #[error("list size {0} must be a power of two in 1..=1024")]
    InvalidListSize(usize),
    #[error("{dynamic} dynamic positions exceed the budget of {budget} non-information positions")]
    DynamicBudget { dynamic: usize, budget: usize },
    #[error("code has {info} information positions, fewer than the {crc} CRC bits")]
    CrcTooLong { info: usize, crc: usize },
    #[error("polarization statistics are for length {got}, code length is {expected}")]
    StatsLength { expected: usize, got: usize },
    #[error("ones-fraction must be positive to normalize amplitude")]
    ZeroOnesFraction,
}
