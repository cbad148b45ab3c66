//! Baseline distributions plugged into the composed class.
//!
//! A baseline exposes its cdf G, survival 1 − G, density g and the first and
//! second derivatives of G and g with respect to its own parameters. The
//! composed model's score and information matrix are built from those
//! partials alone.

mod normal;
mod weibull;

use std::fmt::Debug;

pub use normal::Normal;
pub use weibull::{weibull_cdf, weibull_param_derivs, Weibull};

use crate::error::{Error, Result};
use crate::params::ParamVector;
use crate::roots::solve_increasing;

/// Largest parameter count of any shipped baseline.
pub const MAX_BASE_PARAMS: usize = 2;

/// Which partials to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

/// Value and parameter-derivatives of G and g at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivTable {
    pub n_params: usize,
    pub cdf: f64,
    pub sf: f64,
    pub pdf: f64,
    pub d_cdf: [f64; MAX_BASE_PARAMS],
    pub d_pdf: [f64; MAX_BASE_PARAMS],
    /// Zero when only first order was requested.
    pub d2_cdf: [[f64; MAX_BASE_PARAMS]; MAX_BASE_PARAMS],
    pub d2_pdf: [[f64; MAX_BASE_PARAMS]; MAX_BASE_PARAMS],
}

/// Interval with endpoint-closure flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Support {
    pub const REAL_LINE: Support = Support {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        lower_closed: false,
        upper_closed: false,
    };

    pub fn contains(&self, x: f64) -> bool {
        let above = x > self.lower || (self.lower_closed && x == self.lower);
        let below = x < self.upper || (self.upper_closed && x == self.upper);
        above && below
    }

    pub fn interior_contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    /// Union of two overlapping or touching intervals; disjoint unions are
    /// rejected.
    pub fn union(&self, other: &Support) -> Result<Support> {
        let (first, second) = if self.lower <= other.lower {
            (self, other)
        } else {
            (other, self)
        };
        let touching = second.lower < first.upper
            || (second.lower == first.upper && (first.upper_closed || second.lower_closed));
        if !touching {
            return Err(Error::Domain(format!(
                "disjoint supports [{}, {}] and [{}, {}] are not supported",
                first.lower, first.upper, second.lower, second.upper
            )));
        }
        let lower_closed = if self.lower == other.lower {
            self.lower_closed || other.lower_closed
        } else {
            first.lower_closed
        };
        let (upper, upper_closed) = if self.upper == other.upper {
            (self.upper, self.upper_closed || other.upper_closed)
        } else if self.upper > other.upper {
            (self.upper, self.upper_closed)
        } else {
            (other.upper, other.upper_closed)
        };
        Ok(Support {
            lower: first.lower,
            upper,
            lower_closed,
            upper_closed,
        })
    }
}

/// A parametric cdf/pdf with parameter derivatives.
pub trait Baseline: Clone + Debug + Send + Sync {
    fn family(&self) -> &'static str;

    /// Current parameters with names and bounds.
    fn params(&self) -> ParamVector;

    /// Same family with new parameter values (in `params()` order).
    fn with_values(&self, values: &[f64]) -> Result<Self>;

    fn n_params(&self) -> usize {
        self.params().len()
    }

    fn support(&self) -> Support;

    fn cdf(&self, x: f64) -> f64;

    /// 1 − G(x), accurate where G is close to 1.
    fn sf(&self, x: f64) -> f64;

    fn log_sf(&self, x: f64) -> f64 {
        self.sf(x).ln()
    }

    /// G/(1 − G); `+∞` once the survival underflows.
    fn odds(&self, x: f64) -> f64 {
        let s = self.sf(x);
        if s <= 0.0 {
            f64::INFINITY
        } else {
            self.cdf(x) / s
        }
    }

    fn pdf(&self, x: f64) -> Result<f64>;

    fn log_pdf(&self, x: f64) -> Result<f64>;

    /// Inverse cdf by bracketed root finding.
    fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("probability {p} outside (0, 1)")));
        }
        let sup = self.support();
        let start = if sup.lower.is_finite() && sup.upper.is_finite() {
            0.5 * (sup.lower + sup.upper)
        } else if sup.lower.is_finite() {
            sup.lower + 1.0
        } else if sup.upper.is_finite() {
            sup.upper - 1.0
        } else {
            0.0
        };
        let density = |x: f64| self.pdf(x).unwrap_or(0.0);
        if p <= 0.5 {
            solve_increasing(|x| self.cdf(x) - p, density, sup.lower, sup.upper, start, 1e-14)
        } else {
            let q = 1.0 - p;
            solve_increasing(|x| q - self.sf(x), density, sup.lower, sup.upper, start, 1e-14)
        }
    }

    fn derivs(&self, x: f64, order: DerivOrder) -> Result<DerivTable>;

    /// Method-of-moments member of the same family, used to seed optimizers.
    fn moment_matched(&self, sample: &[f64]) -> Result<Self>;
}

/// Sample mean and (uncorrected) variance.
pub(crate) fn mean_var(sample: &[f64]) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::DegenerateData("empty sample".into()));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var))
}
