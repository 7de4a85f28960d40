use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Evanescent growth `p·l` beyond what `f64` can hold.
    #[error("transfer matrix saturated: evanescent argument {argument:.3} exceeds {limit}")]
    Saturation { argument: f64, limit: f64 },

    #[error("scattering requires E > 0, got {0} nm^-2")]
    NonPositiveEnergy(f64),

    #[error("transfer matrix determinant {0} deviates from 1")]
    Determinant(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("Numerov step gate failed: |T(h) - T(h/2)| = {change:e} at h = {step:e} nm")]
    ConvergenceGate { step: f64, change: f64 },

    #[error("profile file: {0}")]
    Profile(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
