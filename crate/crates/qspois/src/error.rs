//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by qspois operations.
///
/// Numeric routines distinguish between *domain* errors (the caller passed an
/// argument outside the documented range), *regime* errors (the arguments are
/// legal but outside the regime where a formula is valid, e.g. a bound that
/// requires `a > 1`), and genuine numerical failures (an iteration budget was
/// exhausted or an integral diverges).
#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument violates a documented precondition.
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    /// An iterative evaluation did not reach its error target within budget.
    #[error(
        "{context} did not converge after {iterations} iterations \
         (error estimate {estimate:.3e}, target {target:.3e})"
    )]
    NonConvergence {
        context: &'static str,
        iterations: usize,
        estimate: f64,
        target: f64,
    },

    /// The requested integral has non-integrable mass at a boundary.
    #[error("integral does not converge: {0}")]
    NonIntegrable(String),

    /// Arguments are legal but outside a formula's stated regime of validity.
    #[error("outside regime of validity: {0}")]
    Regime(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl CoreError {
    pub(crate) fn domain(context: &'static str, message: impl Into<String>) -> Self {
        CoreError::Domain {
            context,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;

/// Checks that a named argument is strictly positive and finite.
pub(crate) fn require_positive(context: &'static str, name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(CoreError::domain(
            context,
            format!("{name} must be positive and finite, got {value}"),
        ));
    }
    Ok(())
}

/// Checks that a named argument lies strictly inside the open unit interval.
pub(crate) fn require_unit_open(context: &'static str, name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(CoreError::domain(
            context,
            format!("{name} must lie in (0,1), got {value}"),
        ));
    }
    Ok(())
}
