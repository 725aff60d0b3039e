use thiserror::Error;

/// Errors raised by the model, the solvers and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The RIS power budget is zero, so every amplitude must be zero.
    #[error("RIS power budget is zero; the surface must stay silent")]
    DegenerateBudget,

    /// Every element has zero signal coupling and there is no direct link.
    #[error("no signal path: all couplings are zero")]
    NoSignal,

    #[error("{solver} did not converge after {iterations} iterations (last iterate {last})")]
    Convergence {
        solver: &'static str,
        iterations: usize,
        last: f64,
    },

    /// A routine was called outside the regime it is valid for.
    #[error("contract violated: {0}")]
    Contract(String),

    #[error("problem too large for brute force: N = {n}, limit {limit}")]
    TooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
