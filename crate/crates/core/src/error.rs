//! Error type shared by all core operations.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument fell outside its documented domain.
    #[error("invalid range for {name}: {reason}")]
    InvalidRange { name: &'static str, reason: String },

    /// Two vectors that must agree in length did not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A schedule kind was evaluated without its required steepness parameter.
    #[error("guidance schedule `{kind}` requires parameter `{param}`")]
    MissingParameter {
        kind: &'static str,
        param: &'static str,
    },

    /// A conditioning target referenced a component the mixture does not have.
    #[error("unknown target component {index} (mixture has {len} components)")]
    UnknownTarget { index: usize, len: usize },

    /// Mixture weights or variances violate the model invariants.
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("empty {0}")]
    EmptyInput(&'static str),

    /// Trajectories being aggregated disagree in length.
    #[error("trajectory length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A multistep solver update collapsed (h == 0 or missing history).
    #[error("degenerate solver step: {0}")]
    DegenerateStep(String),

    /// A sampling run produced a non-finite energy and was aborted.
    #[error("non-finite energy {value} at step {step}")]
    NonFiniteEnergy { step: usize, value: f64 },
}

impl Error {
    pub(crate) fn range(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidRange {
            name,
            reason: reason.into(),
        }
    }
}
