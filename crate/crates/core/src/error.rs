use thiserror::Error;

use crate::state::Diagnostics;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(Diagnostics),

    #[error("pi-pulse time undefined: omega0 = {omega0} must exceed k = {k}")]
    TauPiDomain { omega0: f64, k: f64 },

    #[error("invalid step size dt = {dt} for duration t = {t}")]
    InvalidStep { dt: f64, t: f64 },

    #[error("integration left the state space: {0}")]
    IntegrationDiagnostic(Diagnostics),

    #[error("invalid conditioning: {0}")]
    InvalidConditioning(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
