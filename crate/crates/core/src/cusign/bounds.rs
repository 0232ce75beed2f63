//! Detection band for the estimated alarm rate.
//!
//! Under no attack the memoryless estimate is approximately
//! `N(E[α], θ E[α](1 − E[α]) / ℓ)`, where `θ = c_τ ℓ/(2ℓ − 1)` was found
//! empirically. For `τ = 1` the alarms are i.i.d. Bernoulli and `c₁ = 1` is
//! exact; larger thresholds carry correlation between alarms.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `c_τ` for `τ = 1..=4`.
pub const THETA_COEFFICIENTS: [f64; 4] = [1.0, 0.74, 0.7, 0.69];

/// Sign probabilities further than this from 1/2 make the normal model rough.
pub const NORMALITY_MARGIN: f64 = 0.05;

pub fn theta_coefficient(tau: u32) -> Result<f64> {
    match tau {
        1..=4 => Ok(THETA_COEFFICIENTS[tau as usize - 1]),
        _ => Err(Error::UnsupportedThreshold(tau)),
    }
}

/// Tabulated scaling value `θ = c_τ ℓ / (2ℓ − 1)`.
pub fn theta_scale(tau: u32, ell: u32) -> Result<f64> {
    let c = theta_coefficient(tau)?;
    let ell = f64::from(ell);
    Ok(c * ell / (2.0 * ell - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlarmRateBounds {
    pub expected: f64,
    /// Lower edge, clamped at zero.
    pub lower: f64,
    pub upper: f64,
    pub theta: f64,
    /// Set when the sign probabilities are far from 1/2.
    pub approximate: bool,
}

impl AlarmRateBounds {
    pub fn annotate_sign_probability(mut self, p_plus: f64) -> Self {
        self.approximate = (p_plus - 0.5).abs() > NORMALITY_MARGIN;
        self
    }

    pub fn std_dev(&self, ell: u32) -> f64 {
        (self.theta * self.expected * (1.0 - self.expected) / f64::from(ell)).sqrt()
    }
}

/// `E[α] ± Z √(θ E[α](1 − E[α]) / ℓ)` with θ from the table.
pub fn detection_bounds(expected: f64, tau: u32, ell: u32, z_score: f64) -> Result<AlarmRateBounds> {
    detection_bounds_with_theta(expected, theta_scale(tau, ell)?, ell, z_score)
}

/// Same band with a caller-supplied θ.
pub fn detection_bounds_with_theta(
    expected: f64,
    theta: f64,
    ell: u32,
    z_score: f64,
) -> Result<AlarmRateBounds> {
    if !(expected > 0.0 && expected < 1.0) {
        return Err(Error::Domain(format!(
            "expected alarm rate must lie in (0, 1), got {expected}"
        )));
    }
    if !(theta > 0.0) || ell == 0 || !(z_score >= 0.0) {
        return Err(Error::Domain("θ, ℓ must be positive and Z nonnegative".into()));
    }
    let half_width = z_score * (theta * expected * (1.0 - expected) / f64::from(ell)).sqrt();
    Ok(AlarmRateBounds {
        expected,
        lower: (expected - half_width).max(0.0),
        upper: expected + half_width,
        theta,
        approximate: false,
    })
}

/// `true` when `α̂` lies strictly outside the band.
pub fn monitor(alpha_hat: f64, bounds: &AlarmRateBounds) -> bool {
    alpha_hat < bounds.lower || alpha_hat > bounds.upper
}
