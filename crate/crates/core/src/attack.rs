//! False data injection on the sensor channel.
//!
//! The stealthy attacks replace the residual outright. With access to the
//! clean measurement `y = C x + η` and the estimator output `C x̂`, the
//! attacker injects
//!
//! ```text
//! ξ = −(y − C x̂) + Σ^{1/2} ξ^{τC}
//! ```
//!
//! so the filter sees the residual `Σ^{1/2} ξ^{τC}` and the test measure is
//! exactly `‖ξ^{τC}‖²`. Keeping that below the CUSUM bias holds the CUSUM
//! accumulator at zero, while a constant (or patterned) `z` is anything but
//! random to the sign detector.

use serde::{Deserialize, Serialize};

use crate::linalg::{Mat, Vector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    #[default]
    None,
    /// Adds the payload to the measurement as-is.
    AdditiveBias,
    /// Residual replacement with a constant payload.
    StealthyPersistent,
    /// Residual replacement with a payload whose sign flips every `period` steps.
    StealthyAlternating,
}

impl AttackKind {
    pub fn is_stealthy(self) -> bool {
        matches!(
            self,
            AttackKind::StealthyPersistent | AttackKind::StealthyAlternating
        )
    }
}

/// Which residual components the stealthy attacker overwrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cancellation {
    /// Cancel the whole residual vector.
    #[default]
    Full,
    /// Touch only the payload channel; the others keep their nominal residual.
    PayloadChannel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    #[serde(default)]
    pub kind: AttackKind,
    /// First attacked step.
    #[serde(default)]
    pub onset: u64,
    /// Payload value on `channel`.
    #[serde(default)]
    pub magnitude: f64,
    /// Zero-based sensor index carrying the payload.
    #[serde(default)]
    pub channel: usize,
    /// Steps between sign flips of the alternating payload.
    #[serde(default = "default_period")]
    pub period: u64,
    #[serde(default)]
    pub cancellation: Cancellation,
}

fn default_period() -> u64 {
    1
}

impl Default for AttackSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl AttackSpec {
    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            onset: 0,
            magnitude: 0.0,
            channel: 0,
            period: 1,
            cancellation: Cancellation::Full,
        }
    }

    pub fn new(kind: AttackKind, onset: u64, magnitude: f64, channel: usize) -> Self {
        Self {
            kind,
            onset,
            magnitude,
            channel,
            ..Self::none()
        }
    }

    pub fn validate(&self, s: usize) -> Result<()> {
        if self.kind != AttackKind::None && self.channel >= s {
            return Err(Error::Config(format!(
                "attack channel {} out of range for {s} sensors",
                self.channel
            )));
        }
        if self.period == 0 {
            return Err(Error::Config("alternation period must be positive".into()));
        }
        if !self.magnitude.is_finite() {
            return Err(Error::Config("attack magnitude must be finite".into()));
        }
        Ok(())
    }

    pub fn is_active(&self, k: u64) -> bool {
        self.kind != AttackKind::None && k >= self.onset
    }

    /// Payload `ξ^{τC}` at step `k`, zero when inactive.
    pub fn payload_at(&self, k: u64, s: usize) -> Vector {
        let mut v = Vector::zeros(s);
        if !self.is_active(k) {
            return v;
        }
        let sign = match self.kind {
            AttackKind::StealthyAlternating if ((k - self.onset) / self.period) % 2 == 1 => -1.0,
            _ => 1.0,
        };
        v[self.channel] = sign * self.magnitude;
        v
    }
}

/// What the attacker observes at the current step.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackerView {
    /// Clean measurement `C x + η`.
    pub measurement: Vector,
    /// Estimator output `C x̂`.
    pub predicted_output: Vector,
}

impl AttackerView {
    pub fn residual(&self) -> Vector {
        &self.measurement - &self.predicted_output
    }
}

/// `ξ = −(y − C x̂) + Σ^{1/2} ξ^{τC}`.
pub fn stealthy_xi(view: &AttackerView, sigma_half: &Mat, xi_target: &Vector) -> Vector {
    sigma_half * xi_target - view.residual()
}

/// Attack vector added to the measurement at step `k`.
pub fn apply_attack(spec: &AttackSpec, k: u64, view: &AttackerView, sigma_half: &Mat) -> Vector {
    let s = view.measurement.len();
    if !spec.is_active(k) {
        return Vector::zeros(s);
    }
    let payload = spec.payload_at(k, s);
    match spec.kind {
        AttackKind::None => Vector::zeros(s),
        AttackKind::AdditiveBias => payload,
        AttackKind::StealthyPersistent | AttackKind::StealthyAlternating => {
            let xi = stealthy_xi(view, sigma_half, &payload);
            match spec.cancellation {
                Cancellation::Full => xi,
                Cancellation::PayloadChannel => {
                    let mut masked = Vector::zeros(s);
                    masked[spec.channel] = xi[spec.channel];
                    masked
                }
            }
        }
    }
}
