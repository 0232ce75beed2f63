//! The cumulative sign detector.
//!
//! Each observation of the test measure `z` is reduced to the sign of
//! `z − z_ref`. A positive accumulator `S⁺ = max(0, S⁺ + sgn)` and a
//! negative accumulator `S⁻ = min(0, S⁻ + sgn)` raise an alarm when they
//! reach `±τ`, resetting to zero on the same step. Alarm flags feed two
//! memoryless rate estimators ([`mre`]) whose values are compared against
//! the detection band from [`bounds`].

pub mod bounds;
pub mod markov;
pub mod mre;

use serde::{Deserialize, Serialize};

use crate::chi2::ChiSquareContext;
use crate::{Error, Result};

pub use bounds::{detection_bounds, monitor, theta_scale, AlarmRateBounds};
pub use markov::{expected_alarm_rate, transition_matrix, Side};
pub use mre::mre_update;

/// Smallest pseudo-window for which the tabulated θ values hold.
pub const MIN_WINDOW: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// Three-way sign of `z − z_ref`. Exact ties give [`Sign::Zero`].
pub fn sign_of(z: f64, z_ref: f64) -> Sign {
    let d = z - z_ref;
    if d < 0.0 {
        Sign::Negative
    } else if d > 0.0 {
        Sign::Positive
    } else {
        Sign::Zero
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CusignConfig {
    /// Alarm threshold on `|S±|`.
    pub tau: u32,
    pub z_ref: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    /// Pseudo-window of the alarm-rate estimator.
    pub ell: u32,
    /// Width of the detection band in standard deviations.
    pub z_score: f64,
}

impl CusignConfig {
    pub fn new(tau: u32, chi: &ChiSquareContext, ell: u32, z_score: f64) -> Result<Self> {
        let cfg = Self {
            tau,
            z_ref: chi.z_ref,
            p_plus: chi.p_plus,
            p_minus: chi.p_minus,
            ell,
            z_score,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau < 1 {
            return Err(Error::Config("CUSIGN threshold must be at least 1".into()));
        }
        if self.ell < MIN_WINDOW {
            return Err(Error::Config(format!(
                "pseudo-window must be at least {MIN_WINDOW}, got {}",
                self.ell
            )));
        }
        if !(self.z_ref > 0.0) {
            return Err(Error::Config("reference point must be positive".into()));
        }
        if (self.p_plus + self.p_minus - 1.0).abs() > 1e-12 {
            return Err(Error::Config("sign probabilities must sum to one".into()));
        }
        if !(self.z_score > 0.0) {
            return Err(Error::Config("bound multiplier must be positive".into()));
        }
        Ok(())
    }

    /// Analytic expected alarm rate for one side.
    pub fn expected_rate(&self, side: Side) -> Result<f64> {
        expected_alarm_rate(self.tau, self.p_plus, self.p_minus, side)
    }

    /// Detection band for one side from the tabulated θ.
    pub fn bounds(&self, side: Side) -> Result<AlarmRateBounds> {
        let b = detection_bounds(self.expected_rate(side)?, self.tau, self.ell, self.z_score)?;
        Ok(b.annotate_sign_probability(self.p_plus))
    }
}

/// Result of one [`CusignState::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub sign: Sign,
    pub alarm_plus: bool,
    pub alarm_minus: bool,
}

/// Test variables, last alarms and alarm-rate estimates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CusignState {
    pub s_plus: u32,
    /// Stored as its magnitude's negation; always in `(−τ, 0]`.
    pub s_minus: i32,
    pub zeta_plus: bool,
    pub zeta_minus: bool,
    pub alpha_hat_plus: f64,
    pub alpha_hat_minus: f64,
}

impl CusignState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advances both accumulators and both rate estimates by one observation.
    pub fn step(&mut self, cfg: &CusignConfig, z: f64) -> StepOutcome {
        let sign = sign_of(z, cfg.z_ref);
        let (plus, minus) = self.accumulate(cfg.tau, sign);
        self.alpha_hat_plus = mre_update(self.alpha_hat_plus, plus, cfg.ell);
        self.alpha_hat_minus = mre_update(self.alpha_hat_minus, minus, cfg.ell);
        StepOutcome {
            sign,
            alarm_plus: plus,
            alarm_minus: minus,
        }
    }

    /// The bare sign-accumulation procedure without rate estimation.
    pub fn accumulate(&mut self, tau: u32, sign: Sign) -> (bool, bool) {
        let tau = tau as i32;
        let step = sign.as_i32();

        let plus = (self.s_plus as i32 + step).max(0);
        self.zeta_plus = plus >= tau;
        self.s_plus = if self.zeta_plus { 0 } else { plus as u32 };

        let minus = (self.s_minus + step).min(0);
        self.zeta_minus = minus <= -tau;
        self.s_minus = if self.zeta_minus { 0 } else { minus };

        (self.zeta_plus, self.zeta_minus)
    }
}

/// Per-step output of a [`CusignDetector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub outcome: StepOutcome,
    pub alpha_hat_plus: f64,
    pub alpha_hat_minus: f64,
    /// Either estimate is outside its band.
    pub out_of_bounds: bool,
}

/// A CUSIGN state machine bundled with its configuration and bands.
#[derive(Debug, Clone, PartialEq)]
pub struct CusignDetector {
    pub config: CusignConfig,
    pub state: CusignState,
    pub bounds_plus: AlarmRateBounds,
    pub bounds_minus: AlarmRateBounds,
}

impl CusignDetector {
    pub fn new(config: CusignConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            bounds_plus: config.bounds(Side::Positive)?,
            bounds_minus: config.bounds(Side::Negative)?,
            config,
            state: CusignState::new(),
        })
    }

    /// Uses explicit bands, e.g. from a calibrated θ.
    pub fn with_bounds(config: CusignConfig, plus: AlarmRateBounds, minus: AlarmRateBounds) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            state: CusignState::new(),
            bounds_plus: plus,
            bounds_minus: minus,
        })
    }

    pub fn observe(&mut self, z: f64) -> Observation {
        let outcome = self.state.step(&self.config, z);
        let a_plus = self.state.alpha_hat_plus;
        let a_minus = self.state.alpha_hat_minus;
        Observation {
            outcome,
            alpha_hat_plus: a_plus,
            alpha_hat_minus: a_minus,
            out_of_bounds: monitor(a_plus, &self.bounds_plus) || monitor(a_minus, &self.bounds_minus),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(tau: u32) -> CusignConfig {
        CusignConfig {
            tau,
            z_ref: 1.0,
            p_plus: 0.5,
            p_minus: 0.5,
            ell: 100,
            z_score: 3.0,
        }
    }

    #[test]
    fn sign_cases() {
        assert_eq!(sign_of(2.0, 2.0), Sign::Zero);
        assert_eq!(sign_of(3.0, 2.0), Sign::Positive);
        assert_eq!(sign_of(0.0, 2.0), Sign::Negative);
    }

    #[test]
    fn three_consecutive_highs_alarm_on_the_third() {
        let c = cfg(3);
        let mut st = CusignState::new();
        let mut path = Vec::new();
        for _ in 0..3 {
            let out = st.step(&c, 5.0);
            path.push((st.s_plus, out.alarm_plus));
        }
        assert_eq!(path, vec![(1, false), (2, false), (0, true)]);
    }

    #[test]
    fn positive_accumulator_floors_at_zero() {
        let c = cfg(3);
        let mut st = CusignState::new();
        st.step(&c, 0.2);
        assert_eq!(st.s_plus, 0);
        assert_eq!(st.s_minus, -1);
    }

    #[test]
    fn alternating_signs_never_alarm() {
        let c = cfg(2);
        let mut st = CusignState::new();
        for k in 0..1000 {
            let z = if k % 2 == 0 { 2.0 } else { 0.5 };
            let out = st.step(&c, z);
            assert!(!out.alarm_plus && !out.alarm_minus);
        }
    }

    #[test]
    fn tie_contributes_no_movement() {
        let c = cfg(2);
        let mut st = CusignState::new();
        st.step(&c, 2.0);
        st.step(&c, c.z_ref);
        assert_eq!(st.s_plus, 1);
        assert_eq!(st.s_minus, 0);
    }

    #[test]
    fn config_validation() {
        let chi = ChiSquareContext::at_median(3).unwrap();
        assert!(CusignConfig::new(0, &chi, 100, 3.0).is_err());
        assert!(CusignConfig::new(2, &chi, 9, 3.0).is_err());
        assert!(CusignConfig::new(2, &chi, 100, 0.0).is_err());
        assert!(CusignConfig::new(2, &chi, 100, 3.0).is_ok());
    }

    #[test]
    fn detector_bounds_match_helpers() {
        let chi = ChiSquareContext::at_median(3).unwrap();
        let det = CusignDetector::new(CusignConfig::new(2, &chi, 100, 3.0).unwrap()).unwrap();
        let e = expected_alarm_rate(2, chi.p_plus, chi.p_minus, Side::Positive).unwrap();
        assert_eq!(det.bounds_plus.expected, e);
        assert!(!det.bounds_plus.approximate);
    }

    proptest! {
        #[test]
        fn accumulators_stay_in_range(tau in 1u32..6, zs in proptest::collection::vec(0.0f64..2.0, 1..400)) {
            let c = cfg(tau);
            let mut st = CusignState::new();
            for z in zs {
                let before = st;
                let out = st.step(&c, z);
                prop_assert!(st.s_plus < tau);
                prop_assert!(st.s_minus > -(tau as i32) && st.s_minus <= 0);
                prop_assert!((0.0..=1.0).contains(&st.alpha_hat_plus));
                prop_assert!((0.0..=1.0).contains(&st.alpha_hat_minus));
                // An alarm fires exactly when the pre-step value sits one
                // move away from the boundary and the move is toward it.
                let s = out.sign.as_i32();
                prop_assert_eq!(out.alarm_plus, before.s_plus as i32 + s == tau as i32);
                prop_assert_eq!(out.alarm_minus, before.s_minus + s == -(tau as i32));
            }
        }
    }
}
