//! Series representation of the class and moment computations.
//!
//! Expanding Φ through the erf power series and the two inner powers
//! (G/(1−G))^{2n+1} and (log[1−G])^{2n+1} as power series in G gives
//!
//! F(x) = Σᵢ Σₙ Σₖ cᵢ,ₙ,ₖ · Gᵢ(x)^{k+2n+1},
//! cᵢ,ₙ,ₖ = (−1/2)ⁿ / (n!(2n+1)√(2π)) · cᵢ,ₖ(n),
//!
//! where c₁,ₖ(n) are the coefficients of (Σ yᵏ)^{2n+1} and c₂,ₖ(n) those of
//! (Σ yᵏ/(k+1))^{2n+1}. Both inner series converge only for G < 1, so the
//! truncated double series is verified in the region G₁, G₂ ≤ 0.3; outside
//! it values are still returned but flagged.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::baselines::Baseline;
use crate::composed::ComposedModel;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::special::{CompensatedSum, FRAC_1_SQRT_2PI};

/// Largest baseline cdf value for which the truncated series is verified.
pub const VERIFIED_REGION: f64 = 0.3;

/// Which inner power series a coefficient table expands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// (Σ yᵏ)^{2n+1}, from G₁/(1−G₁).
    Odds,
    /// (Σ yᵏ/(k+1))^{2n+1}, from −log(1−G₂)/G₂.
    Log,
}

/// Arithmetic needed by the coefficient recursion; implemented for `f64`
/// here and for exact rationals in the test oracle.
pub trait CoefficientScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn sum<I: Iterator<Item = Self>>(terms: I) -> Self;
}

impl CoefficientScalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn sum<I: Iterator<Item = Self>>(terms: I) -> Self {
        terms.collect::<CompensatedSum>().value()
    }
}

/// Coefficients c[0..=k_max] for outer index `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub family: Family,
    pub n: usize,
    pub values: Vec<f64>,
}

/// Outer/inner truncation of the double series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub n_max: usize,
    pub k_max: usize,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self { n_max: 20, k_max: 200 }
    }
}

/// The power-series-raised-to-N recursion with N = 2n+1:
/// c[0] = 1, c[k] = (1/k) Σₛ (2s(n+1) − k)·aₛ·c[k−s],
/// with aₛ = 1 (odds family) or aₛ = 1/(s+1) (log family).
pub fn coefficient_recursion<T: CoefficientScalar>(family: Family, n: usize, k_max: usize) -> Vec<T> {
    let mut c: Vec<T> = Vec::with_capacity(k_max + 1);
    c.push(T::from_i64(1));
    let two_n1 = 2 * (n as i64 + 1);
    for k in 1..=k_max {
        let ki = k as i64;
        let acc = T::sum((1..=k).map(|s| {
            let si = s as i64;
            let weight = T::from_i64(two_n1 * si - ki);
            let a_s = match family {
                Family::Odds => T::from_i64(1),
                Family::Log => T::from_i64(1) / T::from_i64(si + 1),
            };
            weight * a_s * c[k - s]
        }));
        c.push(acc / T::from_i64(ki));
    }
    c
}

pub fn series_coeffs(family: Family, n: usize, k_max: usize) -> SeriesCoefficients {
    SeriesCoefficients {
        family,
        n,
        values: coefficient_recursion::<f64>(family, n, k_max),
    }
}

type CacheKey = (Family, usize, usize);

fn cached_coeffs(family: Family, n: usize, k_max: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("coefficient cache poisoned").get(&(family, n, k_max)) {
        return Arc::clone(hit);
    }
    let values = Arc::new(coefficient_recursion::<f64>(family, n, k_max));
    cache
        .lock()
        .expect("coefficient cache poisoned")
        .entry((family, n, k_max))
        .or_insert(values)
        .clone()
}

/// (−1/2)ⁿ / (n!(2n+1)√(2π))
pub fn outer_weight(n: usize) -> f64 {
    let mut w = FRAC_1_SQRT_2PI;
    for j in 1..=n {
        w *= -0.5 / j as f64;
    }
    w / (2 * n + 1) as f64
}

/// Σₙ Σₖ cₙ,ₖ · y^{k+2n+1} for one family.
fn family_polynomial(family: Family, y: f64, trunc: TruncationSpec) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let mut total = CompensatedSum::new();
    for n in 0..=trunc.n_max {
        let c = cached_coeffs(family, n, trunc.k_max);
        let base = y.powi(2 * n as i32 + 1);
        let mut inner = CompensatedSum::new();
        let mut yk = 1.0;
        for &ck in c.iter() {
            inner.add(ck * yk);
            yk *= y;
        }
        total.add(outer_weight(n) * base * inner.value());
    }
    total.value()
}

/// d/dy of [`family_polynomial`]: Σₙ Σₖ cₙ,ₖ · (k+2n+1) · y^{k+2n}.
fn family_polynomial_derivative(family: Family, y: f64, trunc: TruncationSpec) -> f64 {
    let mut total = CompensatedSum::new();
    for n in 0..=trunc.n_max {
        let c = cached_coeffs(family, n, trunc.k_max);
        let mut inner = CompensatedSum::new();
        let mut yp = y.powi(2 * n as i32);
        for (k, &ck) in c.iter().enumerate() {
            inner.add(ck * (k + 2 * n + 1) as f64 * yp);
            yp *= y;
        }
        total.add(outer_weight(n) * inner.value());
    }
    total.value()
}

/// A series evaluation plus whether it lies in the verified region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub verified: bool,
}

/// Truncated double-series cdf.
pub fn series_cdf<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    x: f64,
    trunc: TruncationSpec,
) -> SeriesValue {
    let g1 = model.g1().cdf(x);
    let g2 = model.g2().cdf(x);
    let value = family_polynomial(Family::Odds, g1, trunc) + family_polynomial(Family::Log, g2, trunc);
    SeriesValue {
        value,
        verified: g1 <= VERIFIED_REGION && g2 <= VERIFIED_REGION,
    }
}

/// How to compute a moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Quadrature,
    /// Sum of exponentiated-baseline moments weighted by the series
    /// coefficients.
    Series(TruncationSpec),
}

const QUAD_ABS: f64 = 1e-13;
const QUAD_REL: f64 = 1e-11;

/// ∫ h(x) f(x) dx over (−∞, z] ∩ support, split at the median.
fn integrate_density<B1, B2, H>(model: &ComposedModel<B1, B2>, upper: f64, h: H) -> Result<f64>
where
    B1: Baseline,
    B2: Baseline,
    H: Fn(f64) -> f64,
{
    let sup = model.support();
    let upper = upper.min(sup.upper);
    let median = model.quantile(0.5)?;
    let integrand = |x: f64| match model.pdf(x) {
        Ok(d) if d > 0.0 => h(x) * d,
        _ => 0.0,
    };
    let split = median.min(upper);
    let lower_part = if sup.lower.is_finite() {
        if split <= sup.lower {
            0.0
        } else {
            integrate(&integrand, sup.lower, split, QUAD_ABS, QUAD_REL)?.value
        }
    } else {
        integrate_to_infinity(|t| integrand(split - t), 0.0, QUAD_ABS, QUAD_REL)?.value
    };
    let upper_part = if upper <= split {
        0.0
    } else if upper.is_finite() {
        integrate(&integrand, split, upper, QUAD_ABS, QUAD_REL)?.value
    } else {
        integrate_to_infinity(&integrand, split, QUAD_ABS, QUAD_REL)?.value
    };
    Ok(lower_part + upper_part)
}

/// Σᵢ ∫₀^{uᵢ} Qᵢ(u)^r · Pᵢ'(u) du, where Pᵢ is the truncated polynomial of
/// family i. By linearity this equals the termwise sum of
/// cᵢ,ₙ,ₖ ∫₀^{uᵢ^N} [Qᵢ(v^{1/N})]^r dv with N = k+2n+1.
fn series_moment<B1, B2>(
    model: &ComposedModel<B1, B2>,
    r: u32,
    upper: [f64; 2],
    trunc: TruncationSpec,
) -> Result<f64>
where
    B1: Baseline,
    B2: Baseline,
{
    let part = |family: Family, q: &dyn Fn(f64) -> Result<f64>, u_max: f64| -> Result<f64> {
        if u_max <= 0.0 {
            return Ok(0.0);
        }
        let integrand = |u: f64| match q(u) {
            Ok(x) => x.powi(r as i32) * family_polynomial_derivative(family, u, trunc),
            Err(_) => 0.0,
        };
        Ok(integrate(integrand, 0.0, u_max.min(1.0), QUAD_ABS, QUAD_REL)?.value)
    };
    let q1 = |u: f64| model.g1().quantile(u);
    let q2 = |u: f64| model.g2().quantile(u);
    Ok(part(Family::Odds, &q1, upper[0])? + part(Family::Log, &q2, upper[1])?)
}

/// E(X^r).
pub fn raw_moment<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    r: u32,
    method: MomentMethod,
) -> Result<f64> {
    if r == 0 {
        return Err(Error::Domain("moment order must be >= 1".into()));
    }
    match method {
        MomentMethod::Quadrature => integrate_density(model, f64::INFINITY, |x| x.powi(r as i32)),
        MomentMethod::Series(trunc) => series_moment(model, r, [1.0, 1.0], trunc),
    }
}

/// ∫_{−∞}^{z} x^r f(x) dx.
pub fn incomplete_moment<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    r: u32,
    z: f64,
    method: MomentMethod,
) -> Result<f64> {
    if r == 0 {
        return Err(Error::Domain("moment order must be >= 1".into()));
    }
    if z <= model.support().lower {
        return Ok(0.0);
    }
    match method {
        MomentMethod::Quadrature => integrate_density(model, z, |x| x.powi(r as i32)),
        MomentMethod::Series(trunc) => {
            series_moment(model, r, [model.g1().cdf(z), model.g2().cdf(z)], trunc)
        }
    }
}

/// E(e^{tX}) by quadrature.
///
/// Divergence is detected by checking that t·x + log f(x) keeps decreasing
/// over twelve decades beyond the 1 − 1e−12 quantile (or below the 1e−12
/// quantile for t < 0 on an unbounded-below support).
pub fn mgf<B1: Baseline, B2: Baseline>(model: &ComposedModel<B1, B2>, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    if !t.is_finite() {
        return Err(Error::Divergence { t });
    }
    let sup = model.support();
    let tail_start = if t > 0.0 {
        (sup.upper.is_infinite()).then(|| model.quantile(1.0 - 1e-12)).transpose()?
    } else {
        (sup.lower.is_infinite()).then(|| model.quantile(1e-12)).transpose()?
    };
    if let Some(x0) = tail_start {
        let h = |x: f64| t * x + model.log_pdf(x).unwrap_or(f64::NEG_INFINITY);
        let h0 = h(x0);
        let scale = x0.abs().max(1.0);
        let dir = t.signum();
        for j in 1..=12 {
            let x = x0 + dir * scale * 10f64.powi(j);
            let hx = h(x);
            if hx.is_nan() || hx >= h0 {
                return Err(Error::Divergence { t });
            }
        }
    }
    let log_f = |x: f64| model.log_pdf(x).unwrap_or(f64::NEG_INFINITY);
    let sup_lower = sup.lower;
    let median = model.quantile(0.5)?;
    let integrand = |x: f64| {
        let l = t * x + log_f(x);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            l.exp()
        }
    };
    let lower = if sup_lower.is_finite() {
        integrate(integrand, sup_lower, median, QUAD_ABS, QUAD_REL)?.value
    } else {
        integrate_to_infinity(|s| integrand(median - s), 0.0, QUAD_ABS, QUAD_REL)?.value
    };
    let upper = integrate_to_infinity(integrand, median, QUAD_ABS, QUAD_REL)?.value;
    let value = lower + upper;
    if !value.is_finite() {
        return Err(Error::Divergence { t });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composed::NwwModel;
    use approx::assert_relative_eq;

    fn reference() -> NwwModel {
        NwwModel::nww(1.3, 2.0, 1.5, 1.8).unwrap()
    }

    #[test]
    fn leading_coefficients() {
        let odds = series_coeffs(Family::Odds, 0, 50);
        assert!(odds.values.iter().all(|&c| c == 1.0));
        let log = series_coeffs(Family::Log, 0, 50);
        for (k, &c) in log.values.iter().enumerate() {
            assert_relative_eq!(c, 1.0 / (k as f64 + 1.0), max_relative = 1e-15);
        }
        let odds3 = series_coeffs(Family::Odds, 1, 3);
        assert_eq!(odds3.values, vec![1.0, 3.0, 6.0, 10.0]);
    }

    #[test]
    fn outer_weights() {
        assert_relative_eq!(outer_weight(0), FRAC_1_SQRT_2PI);
        assert_relative_eq!(outer_weight(1), -0.5 / 3.0 * FRAC_1_SQRT_2PI);
        assert_relative_eq!(outer_weight(2), 0.25 / (2.0 * 5.0) * FRAC_1_SQRT_2PI);
    }

    #[test]
    fn series_vanishes_below_support() {
        let v = series_cdf(&reference(), 0.0, TruncationSpec::default());
        assert_eq!(v.value, 0.0);
        assert!(v.verified);
    }

    #[test]
    fn series_matches_closed_form_in_region() {
        let m = reference();
        let v = series_cdf(&m, 0.5, TruncationSpec::default());
        assert!(v.verified);
        assert!((v.value - m.cdf(0.5)).abs() <= 1e-6);
    }

    #[test]
    fn first_order_truncation() {
        let m = reference();
        let x = 0.004;
        let (g1, g2) = (m.g1().cdf(x), m.g2().cdf(x));
        assert!(g1 <= 1e-3 && g2 <= 1e-3);
        let v = series_cdf(&m, x, TruncationSpec { n_max: 0, k_max: 0 });
        assert_relative_eq!(v.value, (g1 + g2) * FRAC_1_SQRT_2PI, max_relative = 1e-14);
        // first-order Taylor of the closed form
        assert_relative_eq!(v.value, m.cdf(x), max_relative = 2e-3);
    }

    #[test]
    fn flagged_outside_region() {
        assert!(!series_cdf(&reference(), 3.0, TruncationSpec::default()).verified);
    }

    #[test]
    fn moment_errors() {
        assert!(raw_moment(&reference(), 0, MomentMethod::Quadrature).is_err());
        assert!(incomplete_moment(&reference(), 0, 1.0, MomentMethod::Quadrature).is_err());
    }

    #[test]
    fn mgf_basics() {
        let m = reference();
        assert_eq!(mgf(&m, 0.0).unwrap(), 1.0);
        let v = mgf(&m, -1.0).unwrap();
        assert!(v > 0.0 && v < 1.0);
        assert!(mgf(&m, f64::INFINITY).is_err());
    }
}
