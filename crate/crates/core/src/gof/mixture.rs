//! Two-component Normal and Weibull mixtures fitted by EM.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{Baseline, Normal, Weibull};
use crate::error::{Error, Result};
use crate::inference::{standard_errors, DataSet, FitResult};
use crate::parallel::{map_indexed, Exec};
use crate::params::ParamVector;
use crate::rng::{derive_seed, stream};
use crate::special::{log_add_exp, CompensatedSum};

use super::simple::{normal_weighted_mle, weibull_weighted_mle};

pub const MIN_WEIGHT: f64 = 1e-4;
pub const MIN_SCALE: f64 = 1e-8;
pub const MIN_MIXTURE_DATA: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixtureFamily {
    Normal,
    Weibull,
}

impl MixtureFamily {
    fn names(self) -> [&'static str; 4] {
        match self {
            MixtureFamily::Normal => ["mu1", "sigma1", "mu2", "sigma2"],
            MixtureFamily::Weibull => ["k1", "lambda1", "k2", "lambda2"],
        }
    }

    /// Index of the location-like parameter used for label ordering.
    fn location_index(self) -> usize {
        match self {
            MixtureFamily::Normal => 0,
            MixtureFamily::Weibull => 1,
        }
    }

    fn scale(self, p: [f64; 2]) -> f64 {
        p[1]
    }

    pub fn short_name(self) -> &'static str {
        match self {
            MixtureFamily::Normal => "NN",
            MixtureFamily::Weibull => "WW",
        }
    }
}

/// f = w·f₁ + (1 − w)·f₂ with both components from one family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub family: MixtureFamily,
    pub weight: f64,
    pub first: [f64; 2],
    pub second: [f64; 2],
}

impl MixtureModel {
    pub fn new(family: MixtureFamily, weight: f64, first: [f64; 2], second: [f64; 2]) -> Result<Self> {
        if !(weight > 0.0 && weight < 1.0) {
            return Err(Error::InvalidParameter {
                name: "w".into(),
                value: weight,
                reason: "mixture weight must lie in (0, 1)",
            });
        }
        let m = Self {
            family,
            weight,
            first,
            second,
        };
        m.component_log_pdf(0, 1.0)?;
        m.component_log_pdf(1, 1.0)?;
        Ok(m)
    }

    fn component(&self, c: usize) -> [f64; 2] {
        if c == 0 {
            self.first
        } else {
            self.second
        }
    }

    fn component_log_pdf(&self, c: usize, x: f64) -> Result<f64> {
        let [a, b] = self.component(c);
        match self.family {
            MixtureFamily::Normal => Normal::new(a, b)?.log_pdf(x),
            MixtureFamily::Weibull => Weibull::new(a, b)?.log_pdf(x),
        }
    }

    fn component_cdf(&self, c: usize, x: f64) -> Result<f64> {
        let [a, b] = self.component(c);
        Ok(match self.family {
            MixtureFamily::Normal => Normal::new(a, b)?.cdf(x),
            MixtureFamily::Weibull => Weibull::new(a, b)?.cdf(x),
        })
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        Ok(log_add_exp(
            self.weight.ln() + self.component_log_pdf(0, x)?,
            (1.0 - self.weight).ln() + self.component_log_pdf(1, x)?,
        ))
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.weight * self.component_cdf(0, x)? + (1.0 - self.weight) * self.component_cdf(1, x)?)
    }

    /// Same density with the component labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            family: self.family,
            weight: 1.0 - self.weight,
            first: self.second,
            second: self.first,
        }
    }

    /// Labels ordered so component 1 has the smaller location.
    pub fn canonical(&self) -> Self {
        let i = self.family.location_index();
        if self.first[i] > self.second[i] {
            self.swapped()
        } else {
            *self
        }
    }

    /// (w, θ₁, θ₂) flattened.
    pub fn theta(&self) -> [f64; 5] {
        [self.weight, self.first[0], self.first[1], self.second[0], self.second[1]]
    }

    pub fn with_theta(&self, t: &[f64]) -> Result<Self> {
        match t {
            [w, a1, b1, a2, b2] => Self::new(self.family, *w, [*a1, *b1], [*a2, *b2]),
            _ => Err(Error::Domain(format!("mixture takes 5 parameters, got {}", t.len()))),
        }
    }

    pub fn params(&self) -> Result<ParamVector> {
        let names = self.family.names();
        let t = self.theta();
        let mut p = ParamVector::new().with("w", t[0], 0.0, 1.0)?;
        for (j, name) in names.iter().enumerate() {
            let positive = self.family == MixtureFamily::Weibull || j % 2 == 1;
            p = if positive {
                p.with_positive(name, t[j + 1])?
            } else {
                p.with(name, t[j + 1], f64::NEG_INFINITY, f64::INFINITY)?
            };
        }
        Ok(p)
    }

    pub fn log_likelihood(&self, data: &[f64]) -> Result<f64> {
        let mut s = CompensatedSum::default();
        for &x in data {
            s.add(self.log_pdf(x)?);
        }
        Ok(s.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    /// Non-collapsed runs to collect (k-means start plus perturbed splits).
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the log-likelihood changes by at most this much.
    pub tol: f64,
    pub exec: Exec,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            seed: 0,
            max_iter: 1000,
            tol: 1e-8,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFit {
    pub model: MixtureModel,
    pub result: FitResult,
    /// Log-likelihood after every M-step of the winning run.
    pub history: Vec<f64>,
    /// Starts replaced after a component collapsed.
    pub restarts: usize,
}

/// True when each entry is at least the previous one, up to rounding
/// relative to the magnitude of the log-likelihood.
pub fn is_monotone(history: &[f64]) -> bool {
    history
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0))
}

/// Two-cluster Lloyd iteration in one dimension; returns the split point.
fn kmeans_split(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let mut c = [sorted[n / 4], sorted[(3 * n) / 4]];
    let mut split = 0.5 * (c[0] + c[1]);
    for _ in 0..100 {
        let k = sorted.partition_point(|&x| x <= split);
        if k == 0 || k == n {
            return sorted[n / 2];
        }
        c = [
            sorted[..k].iter().sum::<f64>() / k as f64,
            sorted[k..].iter().sum::<f64>() / (n - k) as f64,
        ];
        let next = 0.5 * (c[0] + c[1]);
        if next == split {
            break;
        }
        split = next;
    }
    split
}

fn m_step(family: MixtureFamily, x: &[f64], r: &[f64]) -> Result<MixtureModel> {
    let n = x.len() as f64;
    let w = r.iter().copied().collect::<CompensatedSum>().value() / n;
    if !(w >= MIN_WEIGHT && 1.0 - w >= MIN_WEIGHT) {
        return Err(Error::MixtureCollapse(format!("component weight {w}")));
    }
    let r2: Vec<f64> = r.iter().map(|v| 1.0 - v).collect();
    let fit = |wts: &[f64]| match family {
        MixtureFamily::Normal => normal_weighted_mle(x, wts),
        MixtureFamily::Weibull => weibull_weighted_mle(x, wts),
    };
    let collapse = |e: Error| Error::MixtureCollapse(e.to_string());
    let p1 = fit(r).map_err(collapse)?;
    let p2 = fit(&r2).map_err(collapse)?;
    for p in [p1, p2] {
        let s = family.scale([p.0, p.1]);
        if !(s >= MIN_SCALE) || !p.0.is_finite() {
            return Err(Error::MixtureCollapse(format!("component scale {s}")));
        }
    }
    MixtureModel::new(family, w, [p1.0, p1.1], [p2.0, p2.1]).map_err(collapse)
}

/// E-step: responsibilities of component 1 and the log-likelihood.
fn e_step(m: &MixtureModel, x: &[f64], r: &mut [f64]) -> Result<f64> {
    let (lw1, lw2) = (m.weight.ln(), (1.0 - m.weight).ln());
    let mut ll = CompensatedSum::default();
    for (ri, &xi) in r.iter_mut().zip(x) {
        let a = lw1 + m.component_log_pdf(0, xi)?;
        let b = lw2 + m.component_log_pdf(1, xi)?;
        let l = log_add_exp(a, b);
        *ri = (a - l).exp();
        ll.add(l);
    }
    Ok(ll.value())
}

struct EmRun {
    model: MixtureModel,
    history: Vec<f64>,
}

fn run_em(family: MixtureFamily, x: &[f64], mut r: Vec<f64>, opts: &EmOptions) -> Result<EmRun> {
    let mut history = Vec::new();
    for _ in 0..opts.max_iter {
        let model = m_step(family, x, &r)?;
        let ll = e_step(&model, x, &mut r)?;
        if !ll.is_finite() {
            return Err(Error::MixtureCollapse("non-finite log-likelihood".into()));
        }
        history.push(ll);
        let n = history.len();
        if n >= 2 && (history[n - 1] - history[n - 2]).abs() <= opts.tol {
            return Ok(EmRun { model, history });
        }
    }
    let model = m_step(family, x, &r)?;
    Ok(EmRun { model, history })
}

/// Hard initial responsibilities for attempt `a`.
fn initial_responsibilities(sorted: &[f64], x: &[f64], a: usize, seed: u64) -> Vec<f64> {
    let split = if a == 0 {
        kmeans_split(sorted)
    } else {
        let mut rng = stream(derive_seed(seed, a as u64));
        let u: f64 = rng.random_range(0.15..0.85);
        sorted[((u * sorted.len() as f64) as usize).min(sorted.len() - 1)]
    };
    x.iter().map(|&v| if v <= split { 1.0 } else { 0.0 }).collect()
}

/// Central-difference Hessian and gradient of `f` at `t`.
fn numerical_hessian<F: Fn(&[f64]) -> Result<f64>>(f: F, t: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let p = t.len();
    let h: Vec<f64> = t.iter().map(|v| 1e-4 * v.abs().max(1e-2)).collect();
    let at = |steps: &[(usize, f64)]| {
        let mut u = t.to_vec();
        for &(i, s) in steps {
            u[i] += s * h[i];
        }
        f(&u)
    };
    let f0 = f(t)?;
    let mut hess = vec![vec![0.0; p]; p];
    let mut grad = vec![0.0; p];
    for i in 0..p {
        let fp = at(&[(i, 1.0)])?;
        let fm = at(&[(i, -1.0)])?;
        grad[i] = (fp - fm) / (2.0 * h[i]);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let v = (at(&[(i, 1.0), (j, 1.0)])? - at(&[(i, 1.0), (j, -1.0)])? - at(&[(i, -1.0), (j, 1.0)])?
                + at(&[(i, -1.0), (j, -1.0)])?)
                / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok((hess, grad))
}

/// EM fit of a two-component mixture.
///
/// Starts are the k-means split and random quantile splits. A start whose
/// component collapses is replaced by a fresh one; the run with the highest
/// log-likelihood wins and its labels are canonicalized. Standard errors come
/// from a numerical Hessian of the mixture log-likelihood.
pub fn fit_mixture_em(data: &DataSet, family: MixtureFamily, opts: &EmOptions) -> Result<MixtureFit> {
    let x = data.observations();
    if x.len() < MIN_MIXTURE_DATA {
        return Err(Error::Domain(format!(
            "mixture fit needs at least {MIN_MIXTURE_DATA} observations, got {}",
            x.len()
        )));
    }
    let sorted = data.sorted();
    let wanted = opts.starts.max(1);
    let cap = 4 * wanted;
    let mut runs: Vec<(usize, EmRun)> = Vec::new();
    let mut next = 0usize;
    let mut last_err = None;
    while runs.len() < wanted && next < cap {
        let batch = (wanted - runs.len()).min(cap - next);
        let base = next;
        let out = map_indexed(opts.exec, batch, |i| {
            let r0 = initial_responsibilities(&sorted, x, base + i, opts.seed);
            run_em(family, x, r0, opts)
        });
        for (i, o) in out.into_iter().enumerate() {
            match o {
                Ok(run) => runs.push((base + i, run)),
                Err(e) => last_err = Some(e),
            }
        }
        next += batch;
    }
    let restarts = next - runs.len();
    let best = runs
        .into_iter()
        .reduce(|a, b| {
            let (la, lb) = (*a.1.history.last().unwrap(), *b.1.history.last().unwrap());
            if lb > la || (lb == la && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| {
            Error::MixtureCollapse(format!(
                "all {cap} starts collapsed; last: {}",
                last_err.map(|e| e.to_string()).unwrap_or_default()
            ))
        })?
        .1;

    let model = best.model.canonical();
    let loglik = model.log_likelihood(x)?;
    let (hess, grad) = numerical_hessian(|t| model.with_theta(t)?.log_likelihood(x), &model.theta())?;
    let info: Vec<Vec<f64>> = hess.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    let result = FitResult {
        model: family.short_name().into(),
        estimates: model.params()?,
        std_errors: standard_errors(&info),
        loglik,
        n_obs: x.len(),
        iterations: best.history.len(),
        converged: true,
        gradient_norm_at_opt: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        info_matrix: info,
    };
    Ok(MixtureFit {
        model,
        result,
        history: best.history,
        restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_bumps() -> Vec<f64> {
        let mut v = Vec::new();
        for i in 0..60 {
            let t = (i as f64 + 0.5) / 60.0;
            v.push(1.0 + 0.3 * (t - 0.5));
            v.push(4.0 + 0.6 * (t - 0.5));
        }
        v
    }

    #[test]
    fn label_swap_leaves_density_unchanged() {
        let m = MixtureModel::new(MixtureFamily::Weibull, 0.3, [2.0, 1.0], [4.0, 3.0]).unwrap();
        let s = m.swapped();
        for x in [0.1, 0.7, 1.5, 3.0, 6.0] {
            assert_relative_eq!(m.pdf(x).unwrap(), s.pdf(x).unwrap(), max_relative = 1e-14);
        }
        let c = s.canonical();
        assert_eq!((c.first, c.second), (m.first, m.second));
        assert_relative_eq!(c.weight, m.weight, epsilon = 1e-15);
    }

    #[test]
    fn kmeans_separates_clusters() {
        let mut d = two_bumps();
        d.sort_by(f64::total_cmp);
        let s = kmeans_split(&d);
        assert!(s > 1.2 && s < 3.7, "{s}");
    }

    #[test]
    fn normal_em_monotone_and_ordered() {
        let d = DataSet::new(two_bumps(), "t").unwrap();
        let f = fit_mixture_em(&d, MixtureFamily::Normal, &EmOptions::default()).unwrap();
        assert!(is_monotone(&f.history));
        assert!(f.model.first[0] < f.model.second[0]);
        assert_relative_eq!(f.model.weight, 0.5, epsilon = 1e-6);
        assert_eq!(f.result.estimates.names(), vec!["w", "mu1", "sigma1", "mu2", "sigma2"]);
    }

    #[test]
    fn too_few_points() {
        let d = DataSet::new(vec![1.0, 2.0, 3.0], "t").unwrap();
        assert!(fit_mixture_em(&d, MixtureFamily::Normal, &EmOptions::default()).is_err());
    }

    #[test]
    fn invalid_weight() {
        assert!(MixtureModel::new(MixtureFamily::Normal, 1.0, [0.0, 1.0], [1.0, 1.0]).is_err());
        assert!(MixtureModel::new(MixtureFamily::Normal, 0.5, [0.0, -1.0], [1.0, 1.0]).is_err());
    }
}
