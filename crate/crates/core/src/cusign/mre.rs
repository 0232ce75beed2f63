//! Memoryless run-time estimator of the alarm rate.
//!
//! Welford's running mean `x̄ₙ = x̄ₙ₋₁ + (xₙ − x̄ₙ₋₁)/n` with the divisor
//! frozen at a pseudo-window `ℓ`. Only the current estimate is stored.

/// `α̂ + (ζ − α̂)/ℓ`.
pub fn mre_update(alpha_hat: f64, zeta: bool, ell: u32) -> f64 {
    debug_assert!(ell >= 1);
    let zeta = if zeta { 1.0 } else { 0.0 };
    alpha_hat + (zeta - alpha_hat) / f64::from(ell)
}

/// Stand-alone estimator starting from `α̂₀ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemorylessRate {
    value: f64,
    ell: u32,
}

impl MemorylessRate {
    pub fn new(ell: u32) -> Self {
        assert!(ell >= 1, "pseudo-window must be positive");
        Self { value: 0.0, ell }
    }

    pub fn update(&mut self, zeta: bool) -> f64 {
        self.value = mre_update(self.value, zeta, self.ell);
        self.value
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_alarm() {
        assert!((mre_update(0.0, true, 100) - 0.01).abs() < 1e-18);
    }

    #[test]
    fn fixed_points() {
        assert_eq!(mre_update(1.0, true, 100), 1.0);
        assert_eq!(mre_update(0.0, false, 100), 0.0);
    }

    #[test]
    fn constant_alarms_follow_geometric_closed_form() {
        let ell = 50;
        let mut est = MemorylessRate::new(ell);
        for k in 1..=2000 {
            let v = est.update(true);
            let want = 1.0 - (1.0 - 1.0 / f64::from(ell)).powi(k);
            assert!((v - want).abs() < 1e-12);
        }
        assert!((est.value() - 1.0).abs() < 1e-12);
    }
}
