//! Published reference values that the statistical commands are scored
//! against. Columns indexed by `τ − 1`; appendix rows by `p₊ ∈ {.4, .5, .6}`.

/// Expected alarm rate at `p₊ = p₋ = 0.5`.
pub const ALARM_RATE_EXPECTED: [f64; 4] = [0.5, 1.0 / 6.0, 1.0 / 12.0, 0.05];
/// Simulated alarm rate over 5·10⁶ samples.
pub const ALARM_RATE_SIMULATED: [f64; 4] = [0.50006, 0.16692, 0.083291, 0.050012];

/// `θ = c_τ ℓ / (2ℓ − 1)`.
pub const THETA_COEFFICIENTS: [f64; 4] = [1.0, 0.74, 0.7, 0.69];

pub const APPENDIX_P_PLUS: [f64; 3] = [0.4, 0.5, 0.6];

/// Expected mean of α̂, `[τ][p]`, ℓ = 100.
pub const MEAN_EXPECTED: [[f64; 3]; 4] = [
    [0.400, 0.500, 0.600],
    [0.1143, 1.0 / 6.0, 0.2250],
    [0.0484, 1.0 / 12.0, 0.1256],
    [0.0244, 0.0500, 0.0835],
];
/// Simulated mean of α̂. The τ = 1 entries are printed as "4.01" and "6.01",
/// read here as 0.401 and 0.601.
pub const MEAN_SIMULATED: [[f64; 3]; 4] = [
    [0.401, 0.500, 0.601],
    [0.1142, 0.1665, 0.2251],
    [0.0483, 0.0832, 0.1258],
    [0.0239, 0.0500, 0.0833],
];
pub const STD_EXPECTED: [[f64; 3]; 4] = [
    [0.0346, 0.0354, 0.0346],
    [0.0194, 0.0227, 0.0254],
    [0.0127, 0.0163, 0.0196],
    [0.0091, 0.0128, 0.0163],
];
pub const STD_SIMULATED: [[f64; 3]; 4] = [
    [0.0347, 0.0355, 0.0347],
    [0.0204, 0.0226, 0.0238],
    [0.0138, 0.0163, 0.0185],
    [0.0099, 0.0128, 0.0153],
];

/// Printed detection band for `E[α] = 1/6`, τ = 2, ℓ = 100, Z = 3.
pub const PRINTED_BOUNDS: (f64, f64) = (0.0987, 0.2347);

pub const CUSUM_BIAS: f64 = 3.3;
pub const CUSUM_THRESHOLD: f64 = 2.3226;
pub const CUSUM_RATE: f64 = 0.15;

pub fn appendix_index(p_plus: f64) -> Option<usize> {
    APPENDIX_P_PLUS.iter().position(|p| (p - p_plus).abs() < 1e-9)
}
