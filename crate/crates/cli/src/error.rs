use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ccf::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for bad input, 3 when the precision cap was hit, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use ccf::Error::*;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                InvalidDiscriminant(_)
                | NotFundamental(_)
                | NotPositiveDefinite { .. }
                | DiscriminantMismatch(..)
                | NonUnit(_)
                | Pole(_)
                | InvalidInput(_) => 2,
                PrecisionExhausted { .. } | RoundingUncertified { .. } => 3,
                Internal(_) => 1,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        use ccf::Error::*;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => match e {
                InvalidDiscriminant(_) => "invalid-discriminant",
                NotFundamental(_) => "not-fundamental",
                NotPositiveDefinite { .. } => "not-positive-definite",
                DiscriminantMismatch(..) => "discriminant-mismatch",
                NonUnit(_) => "non-unit",
                Pole(_) => "pole",
                InvalidInput(_) => "invalid-input",
                PrecisionExhausted { .. } => "precision-exhausted",
                RoundingUncertified { .. } => "rounding-uncertified",
                Internal(_) => "internal",
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
