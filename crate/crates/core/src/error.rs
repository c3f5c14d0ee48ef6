use thiserror::Error;

/// Errors produced by operator evaluation, integration and diagnostics.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Vector dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Evaluation requested outside the schedule domain [t0, ∞).
    #[error("domain error: t = {t} is below t0 = {t0}")]
    Domain { t: f64, t0: f64 },

    /// Mode preconditions failed; the run was refused.
    #[error("validation failed: {}", violations.join("; "))]
    Validation { violations: Vec<String> },

    /// The integrated state left the divergence guard.
    #[error("trajectory diverged at t = {t} (|z| = {norm:.3e})")]
    Divergence { t: f64, norm: f64 },

    /// The backward-step fixed-point iteration did not reach tolerance.
    #[error("inner solver stalled after {iters} iterations (residual {residual:.3e})")]
    InnerSolver { residual: f64, iters: usize },

    /// A Lyapunov computation needs an anchor in zer(A+B) and none is known.
    #[error("no anchor available: supply a point of zer(A+B) or run on a problem with a known zero")]
    MissingAnchor,

    /// A fit or estimate was asked for on too little data.
    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
