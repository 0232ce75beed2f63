//! Absorbing Markov chain of the sign accumulators.
//!
//! States `M₀ … M_τ` track `|S±|`; `M_τ` is absorbing. The chain advances
//! with the probability of a sign toward the threshold, retreats (or stays at
//! `M₀`) otherwise. The mean number of steps from `M₀` to absorption is the
//! average run length, and its inverse is the expected alarm rate.

use nalgebra::DVector;

use crate::linalg::Mat;
use crate::{Error, Result};

/// Which accumulator the chain describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `S⁺`, advanced by positive signs.
    Positive,
    /// `S⁻`, advanced by negative signs.
    Negative,
}

fn check_probabilities(p_plus: f64, p_minus: f64) -> Result<()> {
    let valid = (0.0..=1.0).contains(&p_plus)
        && (0.0..=1.0).contains(&p_minus)
        && (p_plus + p_minus - 1.0).abs() <= 1e-12;
    if valid {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "sign probabilities must lie in [0, 1] and sum to one (p+ = {p_plus}, p- = {p_minus})"
        )))
    }
}

fn advance_retreat(p_plus: f64, p_minus: f64, side: Side) -> (f64, f64) {
    match side {
        Side::Positive => (p_plus, p_minus),
        Side::Negative => (p_minus, p_plus),
    }
}

/// `(τ+1)×(τ+1)` transition matrix with absorbing final state.
pub fn transition_matrix(tau: u32, p_plus: f64, p_minus: f64, side: Side) -> Result<Mat> {
    if tau < 1 {
        return Err(Error::Domain("threshold must be at least 1".into()));
    }
    check_probabilities(p_plus, p_minus)?;
    let (advance, retreat) = advance_retreat(p_plus, p_minus, side);
    let t = tau as usize;
    let mut m = Mat::zeros(t + 1, t + 1);
    m[(0, 0)] = retreat;
    for j in 0..t {
        m[(j, j + 1)] = advance;
        if j > 0 {
            m[(j, j - 1)] = retreat;
        }
    }
    m[(t, t)] = 1.0;
    Ok(m)
}

/// Mean absorption times `μ` solving `(I − R) μ = 1`, where `R` is the
/// transient block of the transition matrix.
pub fn mean_run_lengths(tau: u32, p_plus: f64, p_minus: f64, side: Side) -> Result<DVector<f64>> {
    let full = transition_matrix(tau, p_plus, p_minus, side)?;
    let (advance, _) = advance_retreat(p_plus, p_minus, side);
    let degenerate = || Error::DegenerateProbability { p_plus, p_minus };
    if advance <= 0.0 {
        return Err(degenerate());
    }
    let t = tau as usize;
    let transient = full.view((0, 0), (t, t));
    let system = Mat::identity(t, t) - transient;
    let mu = system
        .lu()
        .solve(&DVector::from_element(t, 1.0))
        .ok_or_else(degenerate)?;
    if mu.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(degenerate());
    }
    Ok(mu)
}

/// Expected alarm rate `1 / μ₁`.
pub fn expected_alarm_rate(tau: u32, p_plus: f64, p_minus: f64, side: Side) -> Result<f64> {
    let mu = mean_run_lengths(tau, p_plus, p_minus, side)?;
    Ok(1.0 / mu[0])
}
