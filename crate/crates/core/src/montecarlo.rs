//! Seeded Monte Carlo routines behind the alarm-rate tables and θ
//! calibration.
//!
//! Sample generation is split into shards of [`SHARD_SIZE`] draws, each on
//! its own generator stream (see [`crate::rng`]), and run in parallel. The
//! shard layout depends only on the sample count, so results are identical
//! for any number of worker threads.

use rayon::prelude::*;

use crate::cusign::{CusignConfig, CusignState};
use crate::rng::SimRng;
use crate::stats::RunningStats;

pub const SHARD_SIZE: usize = 1 << 18;

/// `n` i.i.d. χ²ₛ draws under master seed `seed`.
pub fn chi_square_samples(s: u32, n: usize, seed: u64) -> Vec<f64> {
    let shards = n.div_ceil(SHARD_SIZE);
    let mut out: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|i| {
            let len = SHARD_SIZE.min(n - i * SHARD_SIZE);
            let mut rng = SimRng::for_shard(seed, i as u64);
            (0..len).map(|_| rng.chi_square(s)).collect()
        })
        .collect();
    let mut flat = Vec::with_capacity(n);
    for shard in out.iter_mut() {
        flat.append(shard);
    }
    flat
}

/// Alarm counts of one CUSIGN run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlarmFrequency {
    pub steps: usize,
    pub alarms_plus: usize,
    pub alarms_minus: usize,
}

impl AlarmFrequency {
    pub fn rate_plus(&self) -> f64 {
        self.alarms_plus as f64 / self.steps as f64
    }
    pub fn rate_minus(&self) -> f64 {
        self.alarms_minus as f64 / self.steps as f64
    }
}

/// Runs the sign accumulators over `samples` and counts alarms.
pub fn cusign_alarm_frequency(samples: &[f64], tau: u32, z_ref: f64) -> AlarmFrequency {
    let mut st = CusignState::new();
    let mut freq = AlarmFrequency {
        steps: samples.len(),
        alarms_plus: 0,
        alarms_minus: 0,
    };
    for &z in samples {
        let (p, m) = st.accumulate(tau, crate::cusign::sign_of(z, z_ref));
        freq.alarms_plus += p as usize;
        freq.alarms_minus += m as usize;
    }
    freq
}

/// Moments of the memoryless alarm-rate estimates after a warmup.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorStats {
    pub plus: RunningStats,
    pub minus: RunningStats,
    /// Post-warmup `α̂⁺` values, kept only when requested.
    pub plus_values: Option<Vec<f64>>,
}

/// Feeds `samples` through CUSIGN with its estimators and accumulates
/// moments of `α̂±` from step `warmup` on.
pub fn estimator_stats(
    samples: &[f64],
    cfg: &CusignConfig,
    warmup: usize,
    keep_values: bool,
) -> EstimatorStats {
    let mut st = CusignState::new();
    let mut plus = RunningStats::new();
    let mut minus = RunningStats::new();
    let mut values = keep_values.then(|| Vec::with_capacity(samples.len().saturating_sub(warmup)));
    for (k, &z) in samples.iter().enumerate() {
        st.step(cfg, z);
        if k >= warmup {
            plus.push(st.alpha_hat_plus);
            minus.push(st.alpha_hat_minus);
            if let Some(v) = values.as_mut() {
                v.push(st.alpha_hat_plus);
            }
        }
    }
    EstimatorStats {
        plus,
        minus,
        plus_values: values,
    }
}

/// Solves `Var[α̂] = θ E[α](1 − E[α]) / ℓ` for θ.
pub fn theta_from_variance(variance: f64, expected: f64, ell: u32) -> f64 {
    variance * f64::from(ell) / (expected * (1.0 - expected))
}

/// `θ / (ℓ/(2ℓ − 1))`, the coefficient comparable with the θ table.
pub fn theta_coefficient_from_variance(variance: f64, expected: f64, ell: u32) -> f64 {
    let ell_f = f64::from(ell);
    theta_from_variance(variance, expected, ell) * (2.0 * ell_f - 1.0) / ell_f
}
