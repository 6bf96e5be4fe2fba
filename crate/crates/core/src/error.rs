use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants split into two families: [`Error::is_validation`] covers
/// rejected inputs, everything else is a numerical failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Lévy measure is not admissible: {0}")]
    Inadmissible(String),

    #[error("integral `{integral}` diverges")]
    Divergent { integral: String },

    #[error("quadrature for `{integral}` did not converge (error estimate {error:.3e})")]
    QuadratureNonConvergence { integral: String, error: f64 },

    #[error("ODE integration failed at t = {t}: step size underflow")]
    StepSizeUnderflow { t: f64 },

    #[error("rejection sampler acceptance probability {acceptance:.3e} is below {floor:.0e}; review the jump measure or the horizon")]
    AcceptanceTooLow { acceptance: f64, floor: f64 },

    #[error("density inversion failed: {0}")]
    Inversion(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True when the error stems from a rejected input rather than a
    /// numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Inadmissible(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
