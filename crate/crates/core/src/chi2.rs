//! The χ² test measure, its distribution function and the baseline χ²
//! threshold detector.
//!
//! Under no attack `z = rᵀ Σ⁻¹ r` is χ²-distributed with `s` degrees of
//! freedom, so the probability that `z` falls below a reference point is the
//! regularized lower incomplete gamma function `γ(s/2, z_ref/2)`.

use crate::linalg::{Mat, Vector};
use crate::{Error, Result};

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 1000;
const TINY: f64 = 1e-300;

// Lanczos approximation (g = 7, n = 9), accurate to ~1e-15 for x > 0.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1 − x) = π / sin(πx).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Quadratic test measure `rᵀ Σ⁻¹ r`, clamped at zero.
pub fn test_measure(r: &Vector, sigma_inv: &Mat) -> f64 {
    let z = r.dot(&(sigma_inv * r));
    debug_assert!(z >= -1e-12, "negative test measure {z}");
    z.max(0.0)
}

/// Regularized lower incomplete gamma function `P(a, x) = γ(a, x) / Γ(a)`.
///
/// Uses the power series for `x < a + 1` and the modified-Lentz continued
/// fraction for the upper tail otherwise.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!("gamma shape must be positive, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "gamma argument must be nonnegative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    let p = if x < a + 1.0 {
        lower_series(a, x, log_prefactor)
    } else {
        1.0 - upper_continued_fraction(a, x, log_prefactor)
    };
    Ok(p.clamp(0.0, 1.0))
}

fn lower_series(a: f64, x: f64, log_prefactor: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * log_prefactor.exp()
}

fn upper_continued_fraction(a: f64, x: f64, log_prefactor: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    log_prefactor.exp() * h
}

/// Wilson–Hilferty approximation of the χ²ₛ median, `s (1 − 2/(9s))³`.
pub fn median_reference(s: u32) -> f64 {
    let s = f64::from(s);
    s * (1.0 - 2.0 / (9.0 * s)).powi(3)
}

/// Reference point `z_ref` with `Pr(z < z_ref) = p_minus` under χ²ₛ, found by
/// bisection on [`reg_lower_gamma`].
pub fn reference_for_probability(s: u32, p_minus: f64) -> Result<f64> {
    if s == 0 {
        return Err(Error::Domain("sensor count must be at least 1".into()));
    }
    if !(p_minus > 0.0 && p_minus < 1.0) {
        return Err(Error::Domain(format!(
            "probability must lie in (0, 1), got {p_minus}"
        )));
    }
    let half = f64::from(s) / 2.0;
    let cdf = |z: f64| reg_lower_gamma(half, z / 2.0);
    let mut lo = 0.0;
    let mut hi = f64::from(s).max(1.0);
    while cdf(hi)? < p_minus {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid)? < p_minus {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(p₋, p₊)` for sensor count `s` and reference `z_ref`, where
/// `p₋ = Pr(z < z_ref) = γ(s/2, z_ref/2)` and `p₊ = 1 − p₋`.
pub fn sign_probabilities(s: u32, z_ref: f64) -> Result<(f64, f64)> {
    if s == 0 {
        return Err(Error::Domain("sensor count must be at least 1".into()));
    }
    if !(z_ref > 0.0) {
        return Err(Error::Domain(format!(
            "reference point must be positive, got {z_ref}"
        )));
    }
    let p_minus = reg_lower_gamma(f64::from(s) / 2.0, z_ref / 2.0)?;
    Ok((p_minus, 1.0 - p_minus))
}

/// χ² detector alarm: `z > T`.
pub fn chi2_threshold_alarm(z: f64, threshold: f64) -> bool {
    z > threshold
}

/// Everything the sign-based detectors need to know about the χ² measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareContext {
    pub s: u32,
    pub z_ref: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    /// Threshold for the baseline χ² detector, if one is in use.
    pub threshold: Option<f64>,
}

impl ChiSquareContext {
    pub fn new(s: u32, z_ref: f64) -> Result<Self> {
        let (p_minus, p_plus) = sign_probabilities(s, z_ref)?;
        Ok(Self {
            s,
            z_ref,
            p_minus,
            p_plus,
            threshold: None,
        })
    }

    /// Context with `z_ref` at the approximate median.
    pub fn at_median(s: u32) -> Result<Self> {
        Self::new(s, median_reference(s))
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::Domain(format!(
                "χ² threshold must be positive, got {threshold}"
            )));
        }
        self.threshold = Some(threshold);
        Ok(self)
    }

    /// Long-run false-alarm probability of the χ² threshold detector.
    pub fn false_alarm_probability(&self) -> Option<Result<f64>> {
        self.threshold
            .map(|t| reg_lower_gamma(f64::from(self.s) / 2.0, t / 2.0).map(|p| 1.0 - p))
    }
}
