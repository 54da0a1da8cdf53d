use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: {n} rows, need at least {required}")]
    InsufficientData { n: usize, required: usize },

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("degenerate leverage at row {index}: h = {leverage}")]
    DegenerateLeverage { index: usize, leverage: f64 },

    #[error("removal leaves no feature variance: remaining {remaining:e} of {total:e}")]
    DegenerateRemoval { remaining: f64, total: f64 },

    #[error("index {index} out of range for {n} rows")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate index {0} in set")]
    DuplicateIndex(usize),

    #[error("exhaustive search needs {subsets} subsets, cap is {cap}")]
    CombinatorialBudgetExceeded { subsets: u128, cap: u128 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("insufficient tail: {positive} positive values, need {required}")]
    InsufficientTail { positive: usize, required: usize },

    #[error("probability {0} outside (0, 1)")]
    InvalidProbability(f64),

    #[error("block size {block_size} below minimum {min}")]
    BlockTooSmall { block_size: usize, min: usize },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with any context layers stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::SingularDesign(_)
                | Error::DegenerateLeverage { .. }
                | Error::DegenerateRemoval { .. }
                | Error::NonConvergence { .. }
                | Error::DegenerateSample(_)
        )
    }
}
