use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid discriminant {0}: must be negative and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),

    #[error("discriminant {0} is not fundamental")]
    NotFundamental(i64),

    #[error("form ({a},{b},{c}) is not positive definite")]
    NotPositiveDefinite { a: i64, b: i64, c: i64 },

    #[error("discriminant mismatch: {0} vs {1}")]
    DiscriminantMismatch(i64, i64),

    #[error("precision-exhausted: {bits} bits exceeds the cap of {cap} bits")]
    PrecisionExhausted { bits: u32, cap: u32 },

    #[error("rounding-uncertified: worst coefficient is {worst:.3e} from an integer (tolerance {tol})")]
    RoundingUncertified { worst: f64, tol: f64 },

    #[error("pole: argument lies within 2^-{0} of a lattice point")]
    Pole(u32),

    #[error("element is not a unit modulo {0}")]
    NonUnit(i64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
