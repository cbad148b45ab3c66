//! The Normal-(G1,G2) class: F(x) = Φ(G₁/(1−G₁)) − Φ(log[1−G₂]).
//!
//! The density is f = φ(z₁)·g₁/(1−G₁)² + φ(w)·g₂/(1−G₂) with z₁ = G₁/(1−G₁)
//! and w = log(1−G₂). Each term is formed in the log domain and combined
//! with log-sum-exp, so the first term simply vanishes once z₁ is large
//! enough for φ(z₁) to underflow.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::baselines::{Baseline, Support, Weibull};
use crate::error::{Error, Result};
use crate::params::ParamVector;
use crate::roots::solve_increasing;
use crate::special::{log_add_exp, std_normal_cdf, std_normal_log_pdf};

/// Two baselines wired through the Normal-(G1,G2) composition.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedModel<B1: Baseline, B2: Baseline = B1> {
    g1: B1,
    g2: B2,
    support: Support,
}

/// Normal-Weibull-Weibull: both baselines Weibull, θ = (k₁, λ₁, k₂, λ₂).
pub type NwwModel = ComposedModel<Weibull, Weibull>;

impl NwwModel {
    pub fn nww(k1: f64, lambda1: f64, k2: f64, lambda2: f64) -> Result<Self> {
        ComposedModel::new(Weibull::new(k1, lambda1)?, Weibull::new(k2, lambda2)?)
    }
}

impl<B1: Baseline, B2: Baseline> ComposedModel<B1, B2> {
    /// Fails when the two baseline supports are disjoint.
    pub fn new(g1: B1, g2: B2) -> Result<Self> {
        let support = g1.support().union(&g2.support())?;
        Ok(Self { g1, g2, support })
    }

    pub fn g1(&self) -> &B1 {
        &self.g1
    }

    pub fn g2(&self) -> &B2 {
        &self.g2
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Number of parameters in the first baseline (r); θ₂ has `n_params() − r`.
    pub fn split(&self) -> usize {
        self.g1.n_params()
    }

    pub fn n_params(&self) -> usize {
        self.g1.n_params() + self.g2.n_params()
    }

    /// θ = (θ₁, θ₂).
    pub fn theta(&self) -> Vec<f64> {
        let mut v = self.g1.params().values();
        v.extend(self.g2.params().values());
        v
    }

    /// Parameters named `<name>1` for the first baseline and `<name>2` for
    /// the second.
    pub fn params(&self) -> ParamVector {
        let mut out = ParamVector::new();
        for (suffix, pv) in [("1", self.g1.params()), ("2", self.g2.params())] {
            for e in pv.entries() {
                out.push(&format!("{}{}", e.name, suffix), e.value, e.lower, e.upper)
                    .expect("baseline parameters are valid");
            }
        }
        out
    }

    pub fn with_theta(&self, theta: &[f64]) -> Result<Self> {
        let r = self.split();
        if theta.len() != self.n_params() {
            return Err(Error::Domain(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                theta.len()
            )));
        }
        Self::new(self.g1.with_values(&theta[..r])?, self.g2.with_values(&theta[r..])?)
    }

    /// Composed cdf, clamped into [0, 1].
    pub fn cdf(&self, x: f64) -> f64 {
        let z1 = self.g1.odds(x);
        let w = self.g2.log_sf(x);
        // [Φ(z₁) − ½] + [½ − Φ(w)] keeps full relative precision near 0
        let first = 0.5 * libm::erf(z1 * FRAC_1_SQRT_2);
        let second = 0.5 * libm::erf(-w * FRAC_1_SQRT_2);
        (first + second).clamp(0.0, 1.0)
    }

    /// 1 − F(x) = Φ(−z₁) + Φ(w), accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        let z1 = self.g1.odds(x);
        let w = self.g2.log_sf(x);
        (std_normal_cdf(-z1) + std_normal_cdf(w)).clamp(0.0, 1.0)
    }

    /// Logs of the two density terms.
    pub fn term_log_densities(&self, x: f64) -> Result<(f64, f64)> {
        let lg1 = self.g1.log_pdf(x)?;
        let lg2 = self.g2.log_pdf(x)?;
        let t1 = if lg1 == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            let z1 = self.g1.odds(x);
            if z1.is_finite() {
                std_normal_log_pdf(z1) + lg1 - 2.0 * self.g1.log_sf(x)
            } else {
                f64::NEG_INFINITY
            }
        };
        let t2 = if lg2 == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            let w = self.g2.log_sf(x);
            if w.is_finite() {
                std_normal_log_pdf(w) + lg2 - w
            } else {
                f64::NEG_INFINITY
            }
        };
        Ok((t1, t2))
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        if !self.support.contains(x) {
            return Ok(f64::NEG_INFINITY);
        }
        let (t1, t2) = self.term_log_densities(x)?;
        Ok(log_add_exp(t1, t2))
    }

    /// Composed density; zero outside the support.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    /// Inverse cdf with |F(x) − p| ≤ 1e−10.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("probability {p} outside (0, 1)")));
        }
        let start = self
            .g2
            .quantile(0.5)
            .ok()
            .filter(|x| self.support.interior_contains(*x))
            .unwrap_or_else(|| {
                if self.support.lower.is_finite() {
                    self.support.lower + 1.0
                } else {
                    0.0
                }
            });
        let slope = |x: f64| self.pdf(x).unwrap_or(0.0);
        let (lo, hi) = (self.support.lower, self.support.upper);
        if p <= 0.5 {
            solve_increasing(|x| self.cdf(x) - p, slope, lo, hi, start, 1e-14)
        } else {
            let q = 1.0 - p;
            solve_increasing(|x| q - self.sf(x), slope, lo, hi, start, 1e-14)
        }
    }
}

pub fn compose_cdf<B1: Baseline, B2: Baseline>(model: &ComposedModel<B1, B2>, x: f64) -> f64 {
    model.cdf(x)
}

pub fn compose_pdf<B1: Baseline, B2: Baseline>(model: &ComposedModel<B1, B2>, x: f64) -> Result<f64> {
    model.pdf(x)
}

pub fn compose_quantile<B1: Baseline, B2: Baseline>(model: &ComposedModel<B1, B2>, p: f64) -> Result<f64> {
    model.quantile(p)
}

/// max over `grid` of |F_a(x) − F_b(x)|.
pub fn distinguishability_check<B1: Baseline, B2: Baseline>(
    model_a: &ComposedModel<B1, B2>,
    model_b: &ComposedModel<B1, B2>,
    grid: &[f64],
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Domain("empty evaluation grid".into()));
    }
    Ok(grid
        .iter()
        .map(|&x| (model_a.cdf(x) - model_b.cdf(x)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::Normal;
    use approx::assert_abs_diff_eq;

    fn reference() -> NwwModel {
        NwwModel::nww(1.3, 2.0, 1.5, 1.8).unwrap()
    }

    #[test]
    fn limits() {
        let m = reference();
        assert_eq!(m.cdf(0.0), 0.0);
        assert_eq!(m.cdf(-3.0), 0.0);
        assert_eq!(m.cdf(1e6), 1.0);
        assert_eq!(m.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn closed_form_value() {
        // Φ(e^{(0.9)^{1.3}} − 1) − Φ(−1), evaluated with 30-digit arithmetic
        assert_abs_diff_eq!(reference().cdf(1.8), 0.759_335_627_831_458_9, epsilon = 1e-14);
    }

    #[test]
    fn density_zero_at_origin_for_shapes_above_one() {
        assert_eq!(reference().pdf(0.0).unwrap(), 0.0);
        assert_eq!(reference().pdf(-1.0).unwrap(), 0.0);
    }

    #[test]
    fn pole_is_reported() {
        let m = NwwModel::nww(0.8, 2.0, 1.5, 1.8).unwrap();
        assert!(matches!(m.pdf(0.0), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn overflow_region_is_clean() {
        let m = reference();
        let x = 2.0 * 800f64.powf(1.0 / 1.3);
        assert_eq!(m.cdf(x), 1.0);
        let lp = m.log_pdf(x).unwrap();
        assert!(lp.is_finite() || lp == f64::NEG_INFINITY);
    }

    #[test]
    fn median_self_consistency() {
        let m = reference();
        let med = m.quantile(0.5).unwrap();
        assert!((m.cdf(med) - 0.5).abs() <= 1e-10);
        assert!(m.quantile(0.0).is_err());
        assert!(m.quantile(1.0).is_err());
        assert!(m.quantile(1e-15).unwrap() < 1e-3);
    }

    #[test]
    fn distinguishability() {
        let a = reference();
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        assert_eq!(distinguishability_check(&a, &a, &grid).unwrap(), 0.0);
        let b = NwwModel::nww(1.3, 2.0, 1.5, 1.9).unwrap();
        assert!(distinguishability_check(&a, &b, &grid).unwrap() > 1e-4);
        let swapped = NwwModel::nww(1.5, 1.8, 1.3, 2.0).unwrap();
        assert!(distinguishability_check(&a, &swapped, &grid).unwrap() > 1e-3);
        assert!(distinguishability_check(&a, &b, &[]).is_err());
    }

    #[test]
    fn normal_baselines_on_real_line() {
        let m = ComposedModel::new(Normal::new(0.0, 1.0).unwrap(), Normal::new(1.0, 2.0).unwrap()).unwrap();
        assert_eq!(m.support(), Support::REAL_LINE);
        assert!(m.cdf(-40.0) < 1e-12);
        assert!(m.cdf(40.0) > 1.0 - 1e-12);
        let q = m.quantile(0.3).unwrap();
        assert!((m.cdf(q) - 0.3).abs() < 1e-10);
    }

    #[test]
    fn theta_round_trip() {
        let m = reference();
        assert_eq!(m.theta(), vec![1.3, 2.0, 1.5, 1.8]);
        assert_eq!(m.params().names(), vec!["k1", "lambda1", "k2", "lambda2"]);
        let m2 = m.with_theta(&[2.0, 2.2, 6.5, 4.1]).unwrap();
        assert_eq!(m2.split(), 2);
        assert!(m.with_theta(&[1.0, 1.0]).is_err());
        assert!(m.with_theta(&[1.0, -1.0, 1.0, 1.0]).is_err());
    }
}
