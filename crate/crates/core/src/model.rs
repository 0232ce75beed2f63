//! Discrete LTI plant, steady-state Kalman filter and residual generation.

use crate::linalg::{self, Mat, Vector};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Smallest eigenvalue of `R` accepted by the steady-state solver.
pub const MIN_NOISE_EIGENVALUE: f64 = 1e-12;
/// Riccati fixed-point stopping tolerance on the max-abs update.
pub const RICCATI_TOL: f64 = 1e-12;
pub const RICCATI_MAX_ITER: usize = 1_000_000;

/// `x' = A x + B u + ν`, `y = C x + η`, with `ν ~ N(0, Q)` and `η ~ N(0, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    a: Mat,
    b: Mat,
    c: Mat,
    q: Mat,
    r: Mat,
    q_factor: Mat,
    r_factor: Mat,
}

impl SystemModel {
    pub fn new(a: Mat, b: Mat, c: Mat, q: Mat, r: Mat) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(Error::Dimension(format!("A is {}x{}", a.nrows(), a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::Dimension(format!(
                "B has {} rows, expected {n}",
                b.nrows()
            )));
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!(
                "C has {} columns, expected {n}",
                c.ncols()
            )));
        }
        let s = c.nrows();
        if q.shape() != (n, n) {
            return Err(Error::Dimension(format!("Q must be {n}x{n}")));
        }
        if r.shape() != (s, s) {
            return Err(Error::Dimension(format!("R must be {s}x{s}")));
        }
        let q_factor = linalg::noise_factor(&q)?;
        let r_factor = linalg::noise_factor(&r)?;
        Ok(Self {
            a,
            b,
            c,
            q,
            r,
            q_factor,
            r_factor,
        })
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    pub fn c(&self) -> &Mat {
        &self.c
    }
    pub fn q(&self) -> &Mat {
        &self.q
    }
    pub fn r(&self) -> &Mat {
        &self.r
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    /// Number of sensors.
    pub fn s(&self) -> usize {
        self.c.nrows()
    }

    fn check_len(&self, what: &str, v: &Vector, expected: usize) -> Result<()> {
        if v.len() != expected {
            return Err(Error::Dimension(format!(
                "{what} has length {}, expected {expected}",
                v.len()
            )));
        }
        Ok(())
    }

    /// Clean measurement `C x + η`. Draws `s` normals.
    pub fn measure(&self, x: &Vector, rng: &mut SimRng) -> Result<Vector> {
        self.check_len("state", x, self.n())?;
        Ok(&self.c * x + rng.gaussian(&self.r_factor))
    }

    /// Next state `A x + B u + ν`. Draws `n` normals.
    pub fn propagate(&self, x: &Vector, u: &Vector, rng: &mut SimRng) -> Result<Vector> {
        self.check_len("state", x, self.n())?;
        self.check_len("input", u, self.m())?;
        Ok(&self.a * x + &self.b * u + rng.gaussian(&self.q_factor))
    }

    /// One plant step under attack: returns `(x', y)` with `y = C x + η + ξ`.
    ///
    /// Measurement noise is drawn before process noise, so runs that differ
    /// only in `xi` consume the generator identically.
    pub fn simulate_step(
        &self,
        x: &Vector,
        u: &Vector,
        xi: &Vector,
        rng: &mut SimRng,
    ) -> Result<(Vector, Vector)> {
        self.check_len("attack", xi, self.s())?;
        let y = self.measure(x, rng)? + xi;
        let next = self.propagate(x, u, rng)?;
        Ok((next, y))
    }
}

/// Steady-state Kalman filter together with its current estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    /// Steady-state prediction error covariance.
    pub p: Mat,
    /// Kalman gain `L = A P Cᵀ (C P Cᵀ + R)⁻¹`.
    pub gain: Mat,
    /// Residual covariance `Σ = C P Cᵀ + R`.
    pub sigma: Mat,
    pub sigma_inv: Mat,
    /// Symmetric square root of `Σ`.
    pub sigma_half: Mat,
    pub xhat: Vector,
    /// Riccati iterations used to reach the fixed point.
    pub iterations: usize,
}

/// `A P Aᵀ + Q − A P Cᵀ (C P Cᵀ + R)⁻¹ C P Aᵀ`.
fn riccati_map(model: &SystemModel, p: &Mat) -> Result<Mat> {
    let (a, c) = (model.a(), model.c());
    let innovation = c * p * c.transpose() + model.r();
    let inv = innovation
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Conditioning("C P Cᵀ + R is singular".into()))?;
    let apc = a * p * c.transpose();
    let next = a * p * a.transpose() + model.q() - &apc * inv * apc.transpose();
    Ok((&next + next.transpose()) * 0.5)
}

/// Max-abs distance between `p` and one Riccati update of it.
pub fn riccati_residual(model: &SystemModel, p: &Mat) -> Result<f64> {
    Ok(linalg::max_abs(&(riccati_map(model, p)? - p)))
}

/// Solves the discrete Riccati equation by fixed-point iteration from
/// `P₀ = Q` and populates the steady-state filter with `x̂ = 0`.
///
/// The stopping test is `max|ΔP| < 1e-12 · max(1, max|P|)`, which is the
/// absolute test for covariances of order one or smaller.
pub fn solve_steady_state(model: &SystemModel) -> Result<EstimatorState> {
    let min_r = linalg::min_eigenvalue(model.r());
    if min_r <= MIN_NOISE_EIGENVALUE {
        return Err(Error::SingularNoise(min_r));
    }

    let mut p = model.q().clone();
    let mut update = f64::INFINITY;
    let mut iterations = 0;
    while iterations < RICCATI_MAX_ITER {
        let next = riccati_map(model, &p)?;
        update = linalg::max_abs(&(&next - &p));
        p = next;
        iterations += 1;
        if update < RICCATI_TOL * linalg::max_abs(&p).max(1.0) {
            break;
        }
        if !update.is_finite() {
            break;
        }
    }
    if !(update < RICCATI_TOL * linalg::max_abs(&p).max(1.0)) {
        return Err(Error::Divergence { iterations, update });
    }

    let (a, c) = (model.a(), model.c());
    let sigma = c * &p * c.transpose() + model.r();
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    let sigma_inv = linalg::spd_inverse(&sigma)?;
    let gain = a * &p * c.transpose() * &sigma_inv;
    let sigma_half = linalg::mat_sqrt_sym(&sigma)?;
    Ok(EstimatorState {
        p,
        gain,
        sigma,
        sigma_inv,
        sigma_half,
        xhat: Vector::zeros(model.n()),
        iterations,
    })
}

impl EstimatorState {
    /// Estimator output `C x̂`.
    pub fn predicted_output(&self, model: &SystemModel) -> Vector {
        model.c() * &self.xhat
    }

    /// Residual `y − C x̂` for the current estimate.
    pub fn residual(&self, model: &SystemModel, y: &Vector) -> Result<Vector> {
        if y.len() != model.s() {
            return Err(Error::Dimension(format!(
                "measurement has length {}, expected {}",
                y.len(),
                model.s()
            )));
        }
        Ok(y - self.predicted_output(model))
    }

    /// Returns the residual for `y`, then advances
    /// `x̂ ← A x̂ + B u + L r`.
    pub fn step(&mut self, model: &SystemModel, u: &Vector, y: &Vector) -> Result<Vector> {
        if u.len() != model.m() {
            return Err(Error::Dimension(format!(
                "input has length {}, expected {}",
                u.len(),
                model.m()
            )));
        }
        let r = self.residual(model, y)?;
        self.xhat = model.a() * &self.xhat + model.b() * u + &self.gain * &r;
        Ok(r)
    }
}
