use thiserror::Error;

/// Errors raised when an input violates an operation's preconditions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument must be positive (got {0})")]
    NonPositive(i64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("modulus {0} out of supported range {1}..={2}")]
    ModulusOutOfRange(u64, u64, u64),
    #[error("discriminant {0} must be a squarefree integer > 1 with D ≡ 1 (mod 4)")]
    BadDiscriminant(u64),
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("character twist has modulus {got}, expected {expected}")]
    TwistModulus { expected: u64, got: u64 },
    #[error("the principal character is not primitive")]
    PrincipalCharacter,
    #[error("character index {0} is not a valid even primitive index")]
    BadCharacterIndex(u64),
    #[error("pole of {0} at {1}")]
    Pole(&'static str, String),
    #[error("shift ({0}) lies outside the region of absolute convergence")]
    ConvergenceRegion(String),
    #[error("unsupported evaluation: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("truncation insufficient: tail bound {tail:e} exceeds budget {budget:e}")]
    Truncation { tail: f64, budget: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
