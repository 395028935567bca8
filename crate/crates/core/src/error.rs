use thiserror::Error;

/// Errors produced by the averaging library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature step {step:.3e} exceeds the resolution bound {bound:.3e}")]
    QuadratureResolution { step: f64, bound: f64 },

    #[error("partial averages did not stabilize before T = {horizon:.3e} (last change {last_change:.3e})")]
    NonConvergence { horizon: f64, last_change: f64 },

    #[error("blow-up at time {time:.6e}: |state| = {norm:.6e} exceeds guard {limit:.6e}")]
    BlowUp { time: f64, norm: f64, limit: f64 },

    #[error("trajectory form mismatch: expected {expected}, found {found}")]
    FormMismatch { expected: String, found: String },

    #[error("order violation: monomial of degree {degree} in component {component} is below order {order}")]
    OrderViolation { component: usize, degree: u32, order: u32 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }

    /// True for errors caused by the numerics rather than by the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::QuadratureResolution { .. } | Error::NonConvergence { .. } | Error::BlowUp { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
