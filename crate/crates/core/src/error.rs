use thiserror::Error;

/// Errors raised by the estimators, the bootstrap engine and the simulators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("ICM did not converge after {iterations} iterations (max Fenchel violation {max_violation:e})")]
    NonConvergence {
        iterations: usize,
        max_violation: f64,
        /// Masses on the support intervals at the last iterate.
        last_masses: Vec<f64>,
    },

    #[error("degenerate resampling source: every multinomial cell is empty")]
    DegenerateSource,

    #[error("degenerate denominator: starting distribution gives zero probability to an observed cell ({lower}, {upper}]")]
    DegenerateDenominator { lower: f64, upper: f64 },

    #[error("{failed} of {total} bootstrap replicates failed (last error: {last})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        last: String,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures caused by the data or arguments rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
