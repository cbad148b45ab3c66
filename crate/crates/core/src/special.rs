//! Standard normal cdf/pdf and small numerical helpers.
//!
//! Φ is evaluated through `erf`/`erfc` from `libm`, which are accurate to a
//! couple of ulps over the whole real line. The log-density is exposed so the
//! composed model can combine terms without underflow.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{check_finite, check_positive, Result};

/// ln(sqrt(2π))
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal cdf Φ(z).
pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
    } else {
        0.5 + 0.5 * libm::erf(z * FRAC_1_SQRT_2)
    }
}

/// Standard normal survival 1 − Φ(z), accurate in the upper tail.
pub fn std_normal_sf(z: f64) -> f64 {
    std_normal_cdf(-z)
}

/// Φ(z) − 1/2 without cancellation near the origin.
pub fn std_normal_centered(z: f64) -> f64 {
    0.5 * libm::erf(z * FRAC_1_SQRT_2)
}

/// Standard normal density φ(z).
pub fn std_normal_pdf(z: f64) -> f64 {
    std_normal_log_pdf(z).exp()
}

/// ln φ(z).
pub fn std_normal_log_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// ln Φ(z), using an asymptotic expansion deep in the lower tail.
pub fn std_normal_log_cdf(z: f64) -> f64 {
    if z > -30.0 {
        return std_normal_cdf(z).ln();
    }
    // Mills ratio expansion: Φ(z) ≈ φ(z)/|z| · (1 − 1/z² + 3/z⁴ − 15/z⁶)
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    std_normal_log_pdf(z) - (-z).ln() + series.ln()
}

/// Φ((x − μ)/σ) and φ((x − μ)/σ)/σ.
pub fn normal_cdf_pdf(x: f64, mu: f64, sigma: f64) -> Result<(f64, f64)> {
    check_finite("mu", mu)?;
    check_positive("sigma", sigma)?;
    let z = (x - mu) / sigma;
    Ok((std_normal_cdf(z), std_normal_pdf(z) / sigma))
}

/// ln of the N(μ, σ²) density at `x`.
pub fn normal_log_pdf(x: f64, mu: f64, sigma: f64) -> Result<f64> {
    check_finite("mu", mu)?;
    check_positive("sigma", sigma)?;
    let z = (x - mu) / sigma;
    Ok(std_normal_log_pdf(z) - sigma.ln())
}

/// ln(eᵃ + eᵇ) without overflow or underflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Neumaier-compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// 1/sqrt(2π)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn standard_normal_at_origin() {
        let (p, d) = normal_cdf_pdf(0.0, 0.0, 1.0).unwrap();
        assert_eq!(p, 0.5);
        assert_abs_diff_eq!(d, 0.398_942_280_401_432_7, epsilon = 1e-16);
    }

    #[test]
    fn lower_tail_value() {
        // Φ(−1) from a 40-digit erfc evaluation
        let (p, _) = normal_cdf_pdf(-1.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(p, 0.158_655_253_931_457_05, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_at_mean() {
        for sigma in [0.1, 1.0, 7.5] {
            let (p, _) = normal_cdf_pdf(3.2, 3.2, sigma).unwrap();
            assert_eq!(p, 0.5);
        }
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(normal_cdf_pdf(0.0, 0.0, 0.0).is_err());
        assert!(normal_cdf_pdf(0.0, 0.0, -1.0).is_err());
        assert!(normal_cdf_pdf(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn log_cdf_tail_is_continuous() {
        let a = std_normal_log_cdf(-29.999);
        let b = std_normal_log_cdf(-30.001);
        assert!((a - b).abs() < 0.1);
        assert!(std_normal_log_cdf(-100.0).is_finite());
    }

    #[test]
    fn log_add_exp_handles_extremes() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        assert_abs_diff_eq!(log_add_exp(0.0, 0.0), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(log_add_exp(-1000.0, -1000.0), -1000.0 + 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }
}
