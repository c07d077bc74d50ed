use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("element {value} out of range for modulus {modulus}")]
    OutOfRange { value: u64, modulus: u32 },

    #[error("inverse of zero")]
    InverseOfZero,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("size cap exceeded: {what} = {size} > {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("support of the first argument is not contained in the support of the second")]
    SupportViolation,

    #[error("register is not classical: {0}")]
    NotClassical(String),

    #[error("state is not maximally correlated in the supplied basis")]
    NotMaximallyCorrelated,

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("missing characteristic value for class ({0}, {1})")]
    MissingClass(u32, u32),

    #[error("code error: {0}")]
    Code(String),
}

pub type Result<T> = std::result::Result<T, Error>;
