use thiserror::Error;

/// Errors raised by the engine model, integrator and optimisers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid parameter: {0}")]
    Validation(String),

    /// Step halving did not reach the requested tolerance within the step budget.
    #[error("integrator did not converge: relative change {achieved:.3e} > tol {tol:.3e} at {steps} steps")]
    NoConvergence {
        achieved: f64,
        tol: f64,
        steps: usize,
    },

    /// The composed stroke map has no contraction, so no limit cycle exists.
    #[error("limit cycle undefined: 1 - G_c*G_h = {0:.3e}")]
    NoContraction(f64),

    /// The periodic state did not close within tolerance.
    #[error("cycle did not close: |p_end - p_start| = {0:.3e}")]
    ClosureFailed(f64),

    /// Every scanned duration produced non-positive work.
    #[error("no engine regime: all {0} scanned durations give W <= 0")]
    NoEngineRegime(usize),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for precondition failures (as opposed to solver failures).
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
