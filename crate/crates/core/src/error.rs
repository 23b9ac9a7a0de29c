use thiserror::Error;

use crate::quadrature::QuadratureError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is out of range: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("numerical integration failed: {0}")]
    Quadrature(#[from] QuadratureError),

    #[error("LOS probability never crosses {level} on (0, {searched_to_km}] km")]
    NoCrossing { level: f64, searched_to_km: f64 },

    #[error(
        "power search did not satisfy the outage criterion after {steps} steps \
         (last power {power_dbm} dBm, outage {outage})"
    )]
    SearchFailure {
        power_dbm: f64,
        outage: f64,
        steps: usize,
    },

    #[error("power-law fit needs at least two points inside the domain, got {points}")]
    Underdetermined { points: usize },

    #[error("alpha = {alpha} sits on the regime boundary alpha = 1 + delta (delta = {delta})")]
    DegenerateBoundary { alpha: f64, delta: f64 },

    #[error("invalid configuration: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Rejects `value` unless `ok` holds.
pub(crate) fn ensure(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            reason,
        })
    }
}
