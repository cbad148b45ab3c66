//! Likelihood, score, observed information and maximum likelihood fitting.

mod fit;
mod likelihood;
pub mod optimizer;

use serde::{Deserialize, Serialize};

pub use fit::{fit_mle, fit_mle_from, initial_guess, FitOptions};
pub use likelihood::{log_likelihood, loglik_and_score, observed_information, score, ObsTerms};

use crate::error::{Error, Result};
use crate::params::ParamVector;

/// A validated sample of positive observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSet {
    observations: Vec<f64>,
    source: String,
}

impl DataSet {
    /// Rejects empty data and non-positive or non-finite observations.
    pub fn new(observations: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Domain("data set is empty".into()));
        }
        if let Some((index, &x)) = observations.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::DataSupport { index, x });
        }
        Ok(Self {
            observations,
            source: source.into(),
        })
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.observations.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Outcome of a maximum likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub estimates: ParamVector,
    /// `None` when the information matrix is not positive definite.
    pub std_errors: Option<Vec<f64>>,
    pub loglik: f64,
    pub n_obs: usize,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm_at_opt: f64,
    pub info_matrix: Vec<Vec<f64>>,
}

impl FitResult {
    pub fn n_params(&self) -> usize {
        self.estimates.len()
    }
}

/// sqrt(diag(J⁻¹)) when J is symmetric positive definite.
pub fn standard_errors(info: &[Vec<f64>]) -> Option<Vec<f64>> {
    let p = info.len();
    let m = nalgebra::DMatrix::from_fn(p, p, |i, j| info[i][j]);
    let chol = m.cholesky()?;
    let inv = chol.inverse();
    let se: Vec<f64> = (0..p).map(|i| inv[(i, i)].sqrt()).collect();
    se.iter().all(|s| s.is_finite()).then_some(se)
}
