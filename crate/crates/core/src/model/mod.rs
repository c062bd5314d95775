//! Domain types and closed-form formulas: Shannon capacity, equivalent rate
//! after semantic compression, the piecewise-linear computation load and the
//! power-budget feasibility check.

mod allocation;
pub(crate) mod curve;
mod params;

pub use allocation::{check_feasible, total_power, Allocation, Feasibility, Violation};
pub use curve::{comp_load, comp_power, validate_curve, CompLoadCurve, CurveError, Knot, Segment};
pub use params::{ChannelState, SystemParams};

use std::f64::consts::LN_2;

use thiserror::Error;

/// Relative slack applied to every power-budget comparison.
pub const BUDGET_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("transmit power must be non-negative, got {0}")]
    NegativePower(f64),
    #[error("channel gain must be strictly positive, got {0}")]
    NonPositiveGain(f64),
    #[error("channel must contain at least one user")]
    EmptyChannel,
    #[error("compression ratio must lie in (0, 1], got {0}")]
    InvalidRatio(f64),
    #[error("compression ratio {eta} outside load-curve domain [{floor}, 1]")]
    RatioOutOfDomain { eta: f64, floor: f64 },
    #[error("allocation vectors disagree in length: {0}")]
    LengthMismatch(String),
}

/// Shannon capacity `B·log2(1 + p·h/σ²)` in bit/s.
pub fn channel_capacity(p_t: f64, gain: f64, params: &SystemParams) -> Result<f64, ModelError> {
    if !(p_t >= 0.0) {
        return Err(ModelError::NegativePower(p_t));
    }
    if !(gain > 0.0) {
        return Err(ModelError::NonPositiveGain(gain));
    }
    Ok(capacity_unchecked(p_t, gain, params))
}

#[inline]
pub(crate) fn capacity_unchecked(p_t: f64, gain: f64, params: &SystemParams) -> f64 {
    let snr = p_t * gain / params.noise_power_w;
    params.bandwidth_hz * snr.ln_1p() / LN_2
}

/// Delivered information rate once data compressed to ratio `eta` is
/// decompressed at the receiver: `capacity / eta`.
pub fn equivalent_rate(capacity: f64, eta: f64) -> Result<f64, ModelError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(ModelError::InvalidRatio(eta));
    }
    Ok(capacity / eta)
}
