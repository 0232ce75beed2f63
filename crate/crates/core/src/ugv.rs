//! Skid-steer ground vehicle case study.
//!
//! Linearized dynamics with state `x = [v, θ_h, ω]` and inputs `u = [F_l, F_r]`:
//!
//! ```text
//! v̇  = (F_l + F_r − B_r v) / m
//! θ̇_h = ω
//! ω̇  = (w/2 (F_l − F_r) − B_l ω) / I_z
//! ```
//!
//! discretized by forward Euler with all three states measured. The vehicle
//! drives a square of waypoints under a proportional controller acting on the
//! filter's estimate, while both detectors watch the residual.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::attack::{apply_attack, AttackKind, AttackSpec, AttackerView, Cancellation};
use crate::chi2::{median_reference, test_measure, ChiSquareContext};
use crate::cusign::{AlarmRateBounds, CusignConfig, CusignDetector};
use crate::cusum::{AlarmTiming, CusumConfig, CusumState};
use crate::linalg::{Mat, Vector};
use crate::model::{solve_steady_state, SystemModel};
use crate::rng::SimRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UgvParams {
    /// kg
    pub mass: f64,
    /// kg·m²
    pub yaw_inertia: f64,
    /// m
    pub width: f64,
    pub rolling_resistance: f64,
    pub turning_resistance: f64,
    /// s
    pub sample_time: f64,
}

impl Default for UgvParams {
    fn default() -> Self {
        Self {
            mass: 10.0,
            yaw_inertia: 1.0,
            width: 0.5,
            rolling_resistance: 5.0,
            turning_resistance: 2.0,
            sample_time: 0.01,
        }
    }
}

impl UgvParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mass,
            self.yaw_inertia,
            self.width,
            self.rolling_resistance,
            self.turning_resistance,
            self.sample_time,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("vehicle parameters must be positive".into()))
        }
    }

    /// Continuous-time `(A_c, B_c)`.
    pub fn continuous(&self) -> (Mat, Mat) {
        let a = Mat::from_row_slice(
            3,
            3,
            &[
                -self.rolling_resistance / self.mass,
                0.0,
                0.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                -self.turning_resistance / self.yaw_inertia,
            ],
        );
        let lever = self.width / (2.0 * self.yaw_inertia);
        let b = Mat::from_row_slice(3, 2, &[1.0 / self.mass, 1.0 / self.mass, 0.0, 0.0, lever, -lever]);
        (a, b)
    }
}

/// Forward-Euler discretization `A = I + t_s A_c`, `B = t_s B_c`, `C = I₃`.
pub fn build_ugv_model(params: &UgvParams, q: Mat, r: Mat) -> Result<SystemModel> {
    params.validate()?;
    let (ac, bc) = params.continuous();
    let ts = params.sample_time;
    SystemModel::new(Mat::identity(3, 3) + ac * ts, bc * ts, Mat::identity(3, 3), q, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerGains {
    /// Common-mode force per m/s of speed error.
    pub speed: f64,
    /// Differential force per rad of heading error.
    pub heading: f64,
    /// Differential force per rad/s of yaw rate (damping).
    pub yaw_rate: f64,
    /// Per-wheel saturation, N.
    pub force_limit: f64,
    /// Distance at which the next waypoint is selected, m.
    pub switch_radius: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            speed: 20.0,
            heading: 40.0,
            yaw_rate: 15.0,
            force_limit: 50.0,
            switch_radius: 0.2,
        }
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Planar pose used for waypoint tracking.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Dead-reckoning update from speed and heading.
    pub fn advance(&mut self, speed: f64, heading: f64, dt: f64) {
        self.x += dt * speed * heading.cos();
        self.y += dt * speed * heading.sin();
    }
}

/// Proportional wheel forces steering the estimated state toward `goal`.
///
/// The common mode is `B_r v_des + k_v (v_des − v̂)` (feedforward holds the
/// cruise speed) and the differential mode `k_θ e_θ − k_ω ω̂`, where `e_θ` is
/// the wrapped bearing error. A positive error turns left, i.e. `F_l > F_r`.
pub fn waypoint_controller(
    xhat: &Vector,
    position: &Position,
    goal: &Position,
    cruise_speed: f64,
    params: &UgvParams,
    gains: &ControllerGains,
) -> Vector {
    let (v, heading, omega) = (xhat[0], xhat[1], xhat[2]);
    let bearing = (goal.y - position.y).atan2(goal.x - position.x);
    let heading_error = wrap_angle(bearing - heading);
    let common = params.rolling_resistance * cruise_speed + gains.speed * (cruise_speed - v);
    let differential = gains.heading * heading_error - gains.yaw_rate * omega;
    let clamp = |f: f64| f.clamp(-gains.force_limit, gains.force_limit);
    Vector::from_vec(vec![
        clamp(0.5 * (common + differential)),
        clamp(0.5 * (common - differential)),
    ])
}

/// Corners of the square, counter-clockwise starting from `(side, 0)`.
pub fn square_waypoints(side: f64) -> Vec<Position> {
    vec![
        Position { x: side, y: 0.0 },
        Position { x: side, y: side },
        Position { x: 0.0, y: side },
        Position { x: 0.0, y: 0.0 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Diagonal of the process-noise covariance.
    pub q_diag: Vec<f64>,
    /// Diagonal of the measurement-noise covariance.
    pub r_diag: Vec<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            q_diag: vec![1e-4, 1e-5, 1e-4],
            r_diag: vec![1e-3, 1e-3, 1e-3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CusignSettings {
    pub tau: u32,
    pub ell: u32,
    pub z_score: f64,
    /// Reference point; the approximate χ² median when absent.
    pub z_ref: Option<f64>,
    /// Steps before detection flags are evaluated; `5ℓ` when absent.
    pub warmup: Option<u64>,
    /// Overrides the tabulated θ (needed for `τ > 4`).
    pub theta: Option<f64>,
}

impl Default for CusignSettings {
    fn default() -> Self {
        Self {
            tau: 2,
            ell: 100,
            z_score: 3.0,
            z_ref: None,
            warmup: None,
            theta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CusumSettings {
    pub bias: f64,
    pub threshold: f64,
    pub window: u32,
    /// Nominal alarm rate the threshold was tuned for.
    pub target_rate: f64,
    /// Detection when the windowed rate exceeds
    /// `target + Z √(target (1 − target) / window)`.
    pub z_score: f64,
    pub timing: AlarmTiming,
}

impl Default for CusumSettings {
    fn default() -> Self {
        Self {
            bias: 3.3,
            threshold: 2.3226,
            window: 100,
            target_rate: 0.15,
            z_score: 3.0,
            timing: AlarmTiming::SameStep,
        }
    }
}

impl CusumSettings {
    pub fn config(&self) -> Result<CusumConfig> {
        let cfg = CusumConfig {
            bias: self.bias,
            threshold: self.threshold,
            window: self.window,
            timing: self.timing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `(lower, upper)` band of the windowed rate around the target.
    pub fn band(&self) -> (f64, f64) {
        let half =
            self.z_score * (self.target_rate * (1.0 - self.target_rate) / f64::from(self.window)).sqrt();
        ((self.target_rate - half).max(0.0), self.target_rate + half)
    }
}

/// Attack section of a scenario file. The payload is either absolute
/// (`magnitude`) or a fraction of the CUSUM threshold (`threshold_fraction`,
/// which wins when both are set).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSettings {
    pub kind: AttackKind,
    pub onset: u64,
    pub magnitude: f64,
    pub threshold_fraction: Option<f64>,
    pub channel: usize,
    pub period: u64,
    pub cancellation: Cancellation,
}

impl Default for AttackSettings {
    fn default() -> Self {
        let spec = AttackSpec::none();
        Self {
            kind: spec.kind,
            onset: spec.onset,
            magnitude: spec.magnitude,
            threshold_fraction: None,
            channel: spec.channel,
            period: spec.period,
            cancellation: spec.cancellation,
        }
    }
}

impl AttackSettings {
    /// Payload of `fraction · τ^C` on sensor 0, starting at `onset`.
    pub fn relative(kind: AttackKind, onset: u64, fraction: f64) -> Self {
        Self {
            kind,
            onset,
            threshold_fraction: Some(fraction),
            ..Self::default()
        }
    }

    pub fn resolve(&self, cusum_threshold: f64) -> AttackSpec {
        AttackSpec {
            kind: self.kind,
            onset: self.onset,
            magnitude: self
                .threshold_fraction
                .map_or(self.magnitude, |f| f * cusum_threshold),
            channel: self.channel,
            period: self.period,
            cancellation: self.cancellation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// s
    pub duration: f64,
    /// m
    pub side_length: f64,
    /// m/s
    pub cruise_speed: f64,
    pub ugv: UgvParams,
    pub controller: ControllerGains,
    pub noise: NoiseConfig,
    pub cusign: CusignSettings,
    pub cusum: CusumSettings,
    pub attack: AttackSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            duration: 200.0,
            side_length: 5.0,
            cruise_speed: 0.5,
            ugv: UgvParams::default(),
            controller: ControllerGains::default(),
            noise: NoiseConfig::default(),
            cusign: CusignSettings::default(),
            cusum: CusumSettings::default(),
            attack: AttackSettings::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn steps(&self) -> u64 {
        (self.duration / self.ugv.sample_time).round() as u64
    }

    pub fn warmup(&self) -> u64 {
        self.cusign.warmup.unwrap_or(5 * u64::from(self.cusign.ell))
    }

    pub fn attack_spec(&self) -> AttackSpec {
        self.attack.resolve(self.cusum.threshold)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::Config("duration must be positive".into()));
        }
        if !(self.side_length > 0.0) {
            return Err(Error::Config("side length must be positive".into()));
        }
        if !(self.cruise_speed > 0.0) {
            return Err(Error::Config("cruise speed must be positive".into()));
        }
        self.ugv.validate()?;
        if self.noise.q_diag.len() != 3 || self.noise.r_diag.len() != 3 {
            return Err(Error::Config("noise diagonals must have three entries".into()));
        }
        self.cusum.config()?.check_bias(3)?;
        self.attack_spec().validate(3)
    }

    pub fn model(&self) -> Result<SystemModel> {
        let q = Mat::from_diagonal(&Vector::from_vec(self.noise.q_diag.clone()));
        let r = Mat::from_diagonal(&Vector::from_vec(self.noise.r_diag.clone()));
        build_ugv_model(&self.ugv, q, r)
    }

    pub fn cusign_detector(&self, s: u32) -> Result<CusignDetector> {
        let z_ref = self.cusign.z_ref.unwrap_or_else(|| median_reference(s));
        let chi = ChiSquareContext::new(s, z_ref)?;
        let cfg = CusignConfig::new(self.cusign.tau, &chi, self.cusign.ell, self.cusign.z_score)?;
        match self.cusign.theta {
            None => CusignDetector::new(cfg),
            Some(theta) => {
                let band = |side| -> Result<AlarmRateBounds> {
                    let b = crate::cusign::bounds::detection_bounds_with_theta(
                        cfg.expected_rate(side)?,
                        theta,
                        cfg.ell,
                        cfg.z_score,
                    )?;
                    Ok(b.annotate_sign_probability(cfg.p_plus))
                };
                CusignDetector::with_bounds(
                    cfg,
                    band(crate::cusign::Side::Positive)?,
                    band(crate::cusign::Side::Negative)?,
                )
            }
        }
    }
}

/// Everything recorded at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub k: u64,
    pub t: f64,
    pub x: Vector,
    /// Estimate used to form this step's residual.
    pub xhat: Vector,
    pub y: Vector,
    pub xi: Vector,
    pub r: Vector,
    pub z: f64,
    pub s_plus: u32,
    pub s_minus: i32,
    pub zeta_plus: bool,
    pub zeta_minus: bool,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub c: f64,
    pub zeta_c: bool,
    pub alpha_c: f64,
    pub cusign_detect: bool,
    pub cusum_detect: bool,
    pub position: Position,
    pub estimated_position: Position,
    pub waypoint: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTrace {
    pub records: Vec<StepRecord>,
    pub warmup: u64,
    pub attack: AttackSpec,
    pub bounds_plus: AlarmRateBounds,
    pub bounds_minus: AlarmRateBounds,
    /// Band of the CUSUM windowed alarm rate.
    pub cusum_band: (f64, f64),
    pub sigma: Mat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub steps: u64,
    pub warmup: u64,
    /// Attack onset, if an attack is configured.
    pub onset: Option<u64>,
    pub cusign_first_detection: Option<u64>,
    pub cusign_first_detection_after_onset: Option<u64>,
    pub cusum_first_detection: Option<u64>,
    pub cusum_first_detection_after_onset: Option<u64>,
    /// Fraction of post-warmup, pre-onset steps flagged by CUSIGN.
    pub nominal_cusign_detection_fraction: f64,
    pub waypoint_switches: usize,
}

impl ScenarioTrace {
    fn first(&self, from: u64, flag: impl Fn(&StepRecord) -> bool) -> Option<u64> {
        self.records
            .iter()
            .filter(|r| r.k >= from)
            .find(|r| flag(r))
            .map(|r| r.k)
    }

    pub fn onset(&self) -> Option<u64> {
        (self.attack.kind != AttackKind::None).then_some(self.attack.onset)
    }

    pub fn summary(&self) -> ScenarioSummary {
        let onset = self.onset();
        let after = onset.unwrap_or(u64::MAX);
        let nominal: Vec<&StepRecord> = self
            .records
            .iter()
            .filter(|r| r.k >= self.warmup && r.k < after)
            .collect();
        let flagged = nominal.iter().filter(|r| r.cusign_detect).count();
        ScenarioSummary {
            steps: self.records.len() as u64,
            warmup: self.warmup,
            onset,
            cusign_first_detection: self.first(0, |r| r.cusign_detect),
            cusign_first_detection_after_onset: onset.and_then(|k| self.first(k, |r| r.cusign_detect)),
            cusum_first_detection: self.first(0, |r| r.cusum_detect),
            cusum_first_detection_after_onset: onset.and_then(|k| self.first(k, |r| r.cusum_detect)),
            nominal_cusign_detection_fraction: if nominal.is_empty() {
                0.0
            } else {
                flagged as f64 / nominal.len() as f64
            },
            waypoint_switches: self
                .records
                .windows(2)
                .filter(|w| w[0].waypoint != w[1].waypoint)
                .count(),
        }
    }
}

/// Runs the closed loop: measurement, attack, filter, detectors, controller,
/// plant.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioTrace> {
    cfg.validate()?;
    let model = cfg.model()?;
    let mut est = solve_steady_state(&model)?;
    let s = model.s() as u32;
    let mut cusign = cfg.cusign_detector(s)?;
    let cusum_cfg = cfg.cusum.config()?;
    let mut cusum = CusumState::new(cusum_cfg.window);
    let cusum_band = cfg.cusum.band();
    let attack = cfg.attack_spec();
    let warmup = cfg.warmup();
    let ts = cfg.ugv.sample_time;
    let waypoints = square_waypoints(cfg.side_length);

    let mut rng = SimRng::new(cfg.seed);
    let mut x = Vector::zeros(model.n());
    est.xhat = x.clone();
    let mut position = Position::default();
    let mut estimated = Position::default();
    let mut waypoint = 0usize;

    let steps = cfg.steps();
    let mut records = Vec::with_capacity(steps as usize);
    for k in 0..steps {
        let clean = model.measure(&x, &mut rng)?;
        let view = AttackerView {
            measurement: clean.clone(),
            predicted_output: est.predicted_output(&model),
        };
        let xi = apply_attack(&attack, k, &view, &est.sigma_half);
        let y = clean + &xi;

        if estimated.distance(&waypoints[waypoint]) < cfg.controller.switch_radius {
            waypoint = (waypoint + 1) % waypoints.len();
        }
        let xhat = est.xhat.clone();
        let u = waypoint_controller(
            &xhat,
            &estimated,
            &waypoints[waypoint],
            cfg.cruise_speed,
            &cfg.ugv,
            &cfg.controller,
        );

        let r = est.step(&model, &u, &y)?;
        let z = test_measure(&r, &est.sigma_inv);
        let obs = cusign.observe(z);
        let zeta_c = cusum.step(&cusum_cfg, z);
        let alpha_c = cusum.windowed_alarm_rate();
        let evaluated = k >= warmup;

        records.push(StepRecord {
            k,
            t: k as f64 * ts,
            x: x.clone(),
            xhat: xhat.clone(),
            y,
            xi,
            r,
            z,
            s_plus: cusign.state.s_plus,
            s_minus: cusign.state.s_minus,
            zeta_plus: obs.outcome.alarm_plus,
            zeta_minus: obs.outcome.alarm_minus,
            alpha_plus: obs.alpha_hat_plus,
            alpha_minus: obs.alpha_hat_minus,
            c: cusum.c,
            zeta_c,
            alpha_c,
            cusign_detect: evaluated && obs.out_of_bounds,
            cusum_detect: evaluated && alpha_c > cusum_band.1,
            position,
            estimated_position: estimated,
            waypoint,
        });

        position.advance(x[0], x[1], ts);
        estimated.advance(xhat[0], xhat[1], ts);
        x = model.propagate(&x, &u, &mut rng)?;
    }

    Ok(ScenarioTrace {
        records,
        warmup,
        attack,
        bounds_plus: cusign.bounds_plus,
        bounds_minus: cusign.bounds_minus,
        cusum_band,
        sigma: est.sigma.clone(),
    })
}
