use thiserror::Error;

/// Errors raised by the channel, solver and bound engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("validity violation: {0}")]
    ValidityViolation(String),

    #[error("element index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("observation point coincides with the source")]
    CoincidentPoints,

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("noise variance is zero, SNR undefined")]
    ZeroNoise,

    #[error("negative radicand {0} in distance recovery (region mismatch)")]
    NegativeRadicand(f64),

    #[error("element pair is degenerate (identical positions)")]
    DegenerateElements,

    #[error("non-finite result: {0}")]
    NonFinite(&'static str),

    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),

    #[error("quadrature did not converge: estimate {value}, error {error} after {subdivisions} subdivisions")]
    QuadratureFailure { value: f64, error: f64, subdivisions: usize },

    #[error("attitude singularity at t_z = {0} (t_y vanishes)")]
    AttitudeSingularity(f64),

    #[error("singular Fisher information at z_t = {z_t}, t_z = {t_z} (det = {det})")]
    SingularFim { z_t: f64, t_z: f64, det: f64 },

    #[error("operation needs a finite aperture")]
    UnboundedAperture,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
