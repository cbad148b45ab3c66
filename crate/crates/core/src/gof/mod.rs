//! Goodness of fit: information criteria, modified Anderson-Darling and
//! Cramér-von Mises statistics, and the five-model comparison.

mod mixture;
mod simple;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use mixture::{fit_mixture_em, is_monotone, EmOptions, MixtureFamily, MixtureFit, MixtureModel};
pub use simple::{baseline_information, fit_normal, fit_weibull, normal_weighted_mle, weibull_weighted_mle};

use crate::baselines::{Baseline, Normal, Weibull};
use crate::composed::NwwModel;
use crate::error::{Error, Result};
use crate::inference::{fit_mle, DataSet, FitOptions, FitResult};
use crate::parallel::{map_indexed, Exec};
use crate::rng::derive_seed;

/// Probabilities are clamped into [EDF_CLAMP, 1 − EDF_CLAMP].
pub const EDF_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub aic: f64,
    pub caic: f64,
    pub bic: f64,
    pub hqic: f64,
}

/// AIC = 2k − 2ℓ, BIC = k ln n − 2ℓ, CAIC = k(ln n + 1) − 2ℓ and
/// HQIC = 2k ln ln n − 2ℓ.
pub fn information_criteria(loglik: f64, n_params: usize, n: usize) -> Result<InformationCriteria> {
    if n <= 1 {
        return Err(Error::Domain(format!("HQIC needs n > 1 (ln ln n), got n = {n}")));
    }
    let k = n_params as f64;
    let ln_n = (n as f64).ln();
    let m2l = -2.0 * loglik;
    Ok(InformationCriteria {
        aic: 2.0 * k + m2l,
        caic: k * (ln_n + 1.0) + m2l,
        bic: k * ln_n + m2l,
        hqic: 2.0 * k * ln_n.ln() + m2l,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdfStatistics {
    pub a_star: f64,
    pub w_star: f64,
    /// Probabilities moved off 0 or 1 before taking logs.
    pub clamped: usize,
}

/// A* and W* from fitted cdf values at the sorted sample.
///
/// W² = Σ(uᵢ − (2i−1)/(2n))² + 1/(12n), W* = W²(1 + 0.5/n);
/// A² = −n − (1/n)Σ(2i−1)[ln uᵢ + ln(1 − u₍ₙ₊₁₋ᵢ₎)], A* = A²(1 + 0.75/n + 2.25/n²).
pub fn ad_cvm_statistics(sorted_probs: &[f64]) -> Result<EdfStatistics> {
    let n = sorted_probs.len();
    if n == 0 {
        return Err(Error::Domain("no probabilities".into()));
    }
    if sorted_probs.iter().any(|u| !(0.0..=1.0).contains(u)) {
        return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
    }
    if sorted_probs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("probabilities must be sorted ascending".into()));
    }
    let mut clamped = 0;
    let u: Vec<f64> = sorted_probs
        .iter()
        .map(|&v| {
            let c = v.clamp(EDF_CLAMP, 1.0 - EDF_CLAMP);
            if c != v {
                clamped += 1;
            }
            c
        })
        .collect();
    let nf = n as f64;
    let mut w2 = 1.0 / (12.0 * nf);
    let mut s = 0.0;
    for i in 0..n {
        let c = (2 * i + 1) as f64;
        let d = u[i] - c / (2.0 * nf);
        w2 += d * d;
        s += c * (u[i].ln() + (-u[n - 1 - i]).ln_1p());
    }
    let a2 = -nf - s / nf;
    Ok(EdfStatistics {
        a_star: a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf)),
        w_star: w2 * (1.0 + 0.5 / nf),
        clamped,
    })
}

/// Models in the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Nww,
    NormalMixture,
    WeibullMixture,
    Normal,
    Weibull,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Nww,
        ModelKind::NormalMixture,
        ModelKind::WeibullMixture,
        ModelKind::Normal,
        ModelKind::Weibull,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            ModelKind::Nww => "NWW",
            ModelKind::NormalMixture => "NN",
            ModelKind::WeibullMixture => "WW",
            ModelKind::Normal => "N",
            ModelKind::Weibull => "W",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "nww" => ModelKind::Nww,
            "nn" => ModelKind::NormalMixture,
            "ww" => ModelKind::WeibullMixture,
            "n" | "normal" => ModelKind::Normal,
            "w" | "weibull" => ModelKind::Weibull,
            other => {
                return Err(Error::Domain(format!(
                    "unknown model `{other}` (expected nww, nn, ww, normal or weibull)"
                )))
            }
        })
    }
}

/// A fitted model able to evaluate its cdf.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Nww(NwwModel),
    Mixture(MixtureModel),
    Normal(Normal),
    Weibull(Weibull),
}

impl FittedModel {
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            FittedModel::Nww(m) => Ok(m.cdf(x)),
            FittedModel::Mixture(m) => m.cdf(x),
            FittedModel::Normal(m) => Ok(m.cdf(x)),
            FittedModel::Weibull(m) => Ok(m.cdf(x)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    /// Starts for the NWW fit and for each EM fit.
    pub starts: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            starts: 4,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

/// Fits one model kind; the seed is offset per kind so fits are independent.
pub fn fit_model(kind: ModelKind, data: &DataSet, opts: &CompareOptions) -> Result<(FitResult, FittedModel)> {
    let seed = derive_seed(opts.seed, kind as u64);
    match kind {
        ModelKind::Nww => {
            let template = NwwModel::nww(1.0, 1.0, 1.0, 1.0)?;
            let fit = fit_mle(
                &template,
                data,
                &FitOptions {
                    starts: opts.starts,
                    seed,
                    exec: opts.exec,
                    ..FitOptions::default()
                },
            )?;
            let m = template.with_theta(&fit.estimates.values())?;
            Ok((fit, FittedModel::Nww(m)))
        }
        ModelKind::NormalMixture | ModelKind::WeibullMixture => {
            let family = if kind == ModelKind::NormalMixture {
                MixtureFamily::Normal
            } else {
                MixtureFamily::Weibull
            };
            let f = fit_mixture_em(
                data,
                family,
                &EmOptions {
                    starts: opts.starts,
                    seed,
                    exec: opts.exec,
                    ..EmOptions::default()
                },
            )?;
            Ok((f.result, FittedModel::Mixture(f.model)))
        }
        ModelKind::Normal => {
            let f = fit_normal(data)?;
            let v = f.estimates.values();
            Ok((f, FittedModel::Normal(Normal::new(v[0], v[1])?)))
        }
        ModelKind::Weibull => {
            let f = fit_weibull(data)?;
            let v = f.estimates.values();
            Ok((f, FittedModel::Weibull(Weibull::new(v[0], v[1])?)))
        }
    }
}

/// One row of the goodness-of-fit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub model_name: String,
    pub n: usize,
    pub n_params: usize,
    pub loglik: f64,
    pub aic: f64,
    pub caic: f64,
    pub bic: f64,
    pub hqic: f64,
    pub a_star: f64,
    pub w_star: f64,
    pub clamped_probabilities: usize,
}

/// Criteria and EDF statistics for a fitted model on `data`.
pub fn gof_report(fit: &FitResult, model: &FittedModel, data: &DataSet) -> Result<GofReport> {
    let ic = information_criteria(fit.loglik, fit.n_params(), data.n())?;
    let probs = data
        .sorted()
        .iter()
        .map(|&x| model.cdf(x))
        .collect::<Result<Vec<f64>>>()?;
    let edf = ad_cvm_statistics(&probs)?;
    let report = GofReport {
        model_name: fit.model.clone(),
        n: data.n(),
        n_params: fit.n_params(),
        loglik: fit.loglik,
        aic: ic.aic,
        caic: ic.caic,
        bic: ic.bic,
        hqic: ic.hqic,
        a_star: edf.a_star,
        w_star: edf.w_star,
        clamped_probabilities: edf.clamped,
    };
    let all = [report.loglik, report.aic, report.caic, report.bic, report.hqic, report.a_star, report.w_star];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite statistic for {}", report.model_name)));
    }
    Ok(report)
}

/// Comparison outcome for one model; failures are kept in the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    /// 1-based AIC rank among successful fits.
    pub rank: Option<usize>,
    pub fit: Option<FitResult>,
    pub gof: Option<GofReport>,
    pub error: Option<String>,
}

/// Fits each requested model and ranks the successful ones by AIC.
///
/// Rows come back in rank order, failed models last in request order.
pub fn compare_models(data: &DataSet, models: &[ModelKind], opts: &CompareOptions) -> Result<Vec<ComparisonRow>> {
    if models.is_empty() {
        return Err(Error::Domain("no models requested".into()));
    }
    let mut rows: Vec<ComparisonRow> = map_indexed(opts.exec, models.len(), |i| {
        let kind = models[i];
        match fit_model(kind, data, opts).and_then(|(fit, m)| Ok((gof_report(&fit, &m, data)?, fit))) {
            Ok((gof, fit)) => ComparisonRow {
                model: kind,
                rank: None,
                fit: Some(fit),
                gof: Some(gof),
                error: None,
            },
            Err(e) => ComparisonRow {
                model: kind,
                rank: None,
                fit: None,
                gof: None,
                error: Some(e.to_string()),
            },
        }
    });
    let aic = |r: &ComparisonRow| r.gof.as_ref().map(|g| g.aic);
    rows.sort_by(|a, b| match (aic(a), aic(b)) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    for (i, r) in rows.iter_mut().enumerate() {
        if r.gof.is_some() {
            r.rank = Some(i + 1);
        }
    }
    Ok(rows)
}
