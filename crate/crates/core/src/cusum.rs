//! Model-based CUSUM detector on the χ² test measure.
//!
//! `C ← max(0, C + z − b)`; an alarm is raised and `C` reset when the
//! accumulator exceeds `τ^C`. The bias `b` must exceed `E[z] = s` so that
//! `C` has negative drift under no attack.

use serde::{Deserialize, Serialize};

use crate::montecarlo;
use crate::{Error, Result};

/// Realized-rate tolerance accepted by [`tune_threshold`].
pub const TUNING_TOLERANCE: f64 = 0.002;
pub const TUNING_SAMPLES: usize = 2_000_000;
pub const MAX_THRESHOLD: f64 = 1e3;

/// When the threshold check happens relative to the accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlarmTiming {
    /// Accumulate, then alarm and reset on the same step if `C > τ^C`.
    #[default]
    SameStep,
    /// Check the previous value first: if `C_{k−1} > τ^C`, reset and alarm
    /// without accumulating `z_k`.
    NextStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CusumConfig {
    pub bias: f64,
    pub threshold: f64,
    /// Length of the sliding window used for the alarm-rate estimate.
    pub window: u32,
    #[serde(default)]
    pub timing: AlarmTiming,
}

impl CusumConfig {
    pub fn new(bias: f64, threshold: f64, window: u32) -> Result<Self> {
        let cfg = Self {
            bias,
            threshold,
            window,
            timing: AlarmTiming::SameStep,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bias > 0.0) {
            return Err(Error::Config(format!(
                "CUSUM bias must be positive, got {}",
                self.bias
            )));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config(format!(
                "CUSUM threshold must be positive, got {}",
                self.threshold
            )));
        }
        if self.window == 0 {
            return Err(Error::Config("CUSUM window must be positive".into()));
        }
        Ok(())
    }

    /// The accumulator only has negative drift when `b > s`.
    pub fn check_bias(&self, s: u32) -> Result<()> {
        if self.bias > f64::from(s) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "CUSUM bias {} must exceed the sensor count {s}",
                self.bias
            )))
        }
    }
}

/// Accumulator, last alarm, and the ring buffer of recent alarms.
#[derive(Debug, Clone, PartialEq)]
pub struct CusumState {
    pub c: f64,
    pub zeta: bool,
    ring: Vec<bool>,
    head: usize,
    filled: usize,
    alarms_in_window: usize,
}

impl CusumState {
    pub fn new(window: u32) -> Self {
        Self {
            c: 0.0,
            zeta: false,
            ring: vec![false; window as usize],
            head: 0,
            filled: 0,
            alarms_in_window: 0,
        }
    }

    pub fn step(&mut self, cfg: &CusumConfig, z: f64) -> bool {
        self.zeta = match cfg.timing {
            AlarmTiming::SameStep => {
                self.c = (self.c + z - cfg.bias).max(0.0);
                self.c > cfg.threshold
            }
            AlarmTiming::NextStep => {
                if self.c > cfg.threshold {
                    true
                } else {
                    self.c = (self.c + z - cfg.bias).max(0.0);
                    false
                }
            }
        };
        if self.zeta {
            self.c = 0.0;
        }
        self.record(self.zeta);
        self.zeta
    }

    fn record(&mut self, alarm: bool) {
        let len = self.ring.len();
        if self.filled == len && self.ring[self.head] {
            self.alarms_in_window -= 1;
        }
        self.ring[self.head] = alarm;
        if alarm {
            self.alarms_in_window += 1;
        }
        self.head = (self.head + 1) % len;
        self.filled = (self.filled + 1).min(len);
    }

    /// Mean of the stored alarm flags; before the window fills, divides by
    /// the number of steps seen.
    pub fn windowed_alarm_rate(&self) -> f64 {
        if self.filled == 0 {
            0.0
        } else {
            self.alarms_in_window as f64 / self.filled as f64
        }
    }

    /// Stored flags, oldest first.
    pub fn window_flags(&self) -> Vec<bool> {
        let len = self.ring.len();
        let start = if self.filled == len { self.head } else { 0 };
        (0..self.filled).map(|i| self.ring[(start + i) % len]).collect()
    }
}

/// Long-run alarm frequency of a CUSUM run over `samples`.
pub fn alarm_rate_on(samples: &[f64], cfg: &CusumConfig) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut c = 0.0_f64;
    let mut alarms = 0usize;
    match cfg.timing {
        AlarmTiming::SameStep => {
            for &z in samples {
                c = (c + z - cfg.bias).max(0.0);
                if c > cfg.threshold {
                    alarms += 1;
                    c = 0.0;
                }
            }
        }
        AlarmTiming::NextStep => {
            for &z in samples {
                if c > cfg.threshold {
                    alarms += 1;
                    c = 0.0;
                } else {
                    c = (c + z - cfg.bias).max(0.0);
                }
            }
        }
    }
    alarms as f64 / samples.len() as f64
}

/// Finds `τ^C` whose nominal alarm rate matches `target` for bias `b` and
/// `s` sensors.
///
/// Draws `samples` χ²ₛ deviates once and bisects on `τ^C ∈ (0, 10³]` over
/// that common sample, so the rate is evaluated on identical data at every
/// candidate. Fails when the target is outside the reachable range or the
/// crossing point misses it by more than [`TUNING_TOLERANCE`].
pub fn tune_threshold(bias: f64, s: u32, target: f64, seed: u64) -> Result<f64> {
    tune_threshold_with(bias, s, target, TUNING_SAMPLES, seed, AlarmTiming::SameStep)
}

pub fn tune_threshold_with(
    bias: f64,
    s: u32,
    target: f64,
    samples: usize,
    seed: u64,
    timing: AlarmTiming,
) -> Result<f64> {
    if !(bias > f64::from(s)) {
        return Err(Error::Tuning(format!("bias {bias} must exceed sensor count {s}")));
    }
    if !(target > 0.0 && target < 0.5) {
        return Err(Error::Tuning(format!(
            "target rate must lie in (0, 0.5), got {target}"
        )));
    }
    let zs = montecarlo::chi_square_samples(s, samples, seed);
    let rate = |threshold: f64| {
        alarm_rate_on(
            &zs,
            &CusumConfig {
                bias,
                threshold,
                window: 1,
                timing,
            },
        )
    };

    let mut lo = 1e-9;
    let mut hi = MAX_THRESHOLD;
    if rate(lo) < target - TUNING_TOLERANCE {
        return Err(Error::Tuning(format!(
            "target {target} exceeds the largest reachable rate {:.4}",
            rate(lo)
        )));
    }
    if rate(hi) > target + TUNING_TOLERANCE {
        return Err(Error::Tuning(format!(
            "target {target} needs a threshold above {MAX_THRESHOLD}"
        )));
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let threshold = 0.5 * (lo + hi);
    let realized = rate(threshold);
    if (realized - target).abs() > TUNING_TOLERANCE {
        return Err(Error::Tuning(format!(
            "realized rate {realized:.4} at threshold {threshold:.4} misses target {target}"
        )));
    }
    Ok(threshold)
}
