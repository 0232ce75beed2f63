//! Residual-based detection of stealthy sensor attacks on linear
//! cyber-physical systems.
//!
//! The crate is built around a steady-state Kalman filter whose residual is
//! reduced to the quadratic test measure `z = rᵀ Σ⁻¹ r`. Two detectors watch
//! that scalar:
//!
//! * [`cusign`]: counts the *sign* of `z − z_ref` in two one-sided
//!   accumulators and tracks the resulting alarm rate with a memoryless
//!   estimator. Its expected alarm rate comes from an absorbing Markov chain,
//!   and the estimator's spread gives detection bounds.
//! * [`cusum`]: the model-based CUSUM detector on `z − b`, which bounds the
//!   magnitude an attacker may inject.
//!
//! [`attack`] builds the residual-replacement attack that stays invisible to
//! CUSUM, and [`ugv`] wires everything into a closed-loop ground-vehicle
//! scenario. [`montecarlo`] holds the seeded simulation routines used to
//! check the analytic results.
//!
//! ```
//! use cusign_core::chi2::{median_reference, sign_probabilities};
//! use cusign_core::cusign::markov::{expected_alarm_rate, Side};
//!
//! let z_ref = median_reference(3);
//! let (p_minus, p_plus) = sign_probabilities(3, z_ref).unwrap();
//! assert!((p_plus - 0.5).abs() < 0.005);
//!
//! let rate = expected_alarm_rate(2, 0.5, 0.5, Side::Positive).unwrap();
//! assert!((rate - 1.0 / 6.0).abs() < 1e-12);
//! # let _ = p_minus;
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod chi2;
pub mod cusign;
pub mod cusum;
mod error;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod rng;
pub mod stats;
pub mod ugv;

pub use error::{Error, Result};
