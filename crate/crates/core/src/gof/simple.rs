//! Single-distribution competitors: Normal and Weibull maximum likelihood.

use crate::baselines::{Baseline, DerivOrder, Normal, Weibull};
use crate::error::{Error, Result};
use crate::inference::{standard_errors, DataSet, FitResult};
use crate::roots::solve_increasing;
use crate::special::CompensatedSum;

/// Tolerance on the Weibull profile-equation root.
pub const SHAPE_TOL: f64 = 1e-10;

/// Observed information −Σ ∂² log g of a baseline at `data`.
pub fn baseline_information<B: Baseline>(b: &B, data: &[f64]) -> Result<Vec<Vec<f64>>> {
    let p = b.n_params();
    let mut acc = vec![vec![CompensatedSum::default(); p]; p];
    for &x in data {
        let t = b.derivs(x, DerivOrder::Second)?;
        if !(t.pdf > 0.0) {
            return Err(Error::Domain(format!("zero density at x = {x}")));
        }
        for i in 0..p {
            for j in 0..p {
                let h = t.d2_pdf[i][j] / t.pdf - t.d_pdf[i] * t.d_pdf[j] / (t.pdf * t.pdf);
                acc[i][j].add(-h);
            }
        }
    }
    Ok(acc
        .iter()
        .map(|r| r.iter().map(CompensatedSum::value).collect())
        .collect())
}

fn baseline_fit<B: Baseline>(name: &str, b: B, data: &DataSet, iterations: usize) -> Result<FitResult> {
    let mut loglik = CompensatedSum::default();
    for &x in data.observations() {
        loglik.add(b.log_pdf(x)?);
    }
    let loglik = loglik.value();
    let info = baseline_information(&b, data.observations())?;
    Ok(FitResult {
        model: name.into(),
        estimates: b.params(),
        std_errors: standard_errors(&info),
        loglik,
        n_obs: data.n(),
        iterations,
        converged: true,
        gradient_norm_at_opt: 0.0,
        info_matrix: info,
    })
}

/// Weighted normal MLE: weighted mean and uncorrected standard deviation.
pub fn normal_weighted_mle(x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    let sw: f64 = w.iter().copied().collect::<CompensatedSum>().value();
    if !(sw > 0.0) {
        return Err(Error::DegenerateData("zero total weight".into()));
    }
    let mu = x.iter().zip(w).map(|(x, w)| w * x).collect::<CompensatedSum>().value() / sw;
    let var = x
        .iter()
        .zip(w)
        .map(|(x, w)| w * (x - mu) * (x - mu))
        .collect::<CompensatedSum>()
        .value()
        / sw;
    if !(var > 0.0) {
        return Err(Error::DegenerateData("zero variance".into()));
    }
    Ok((mu, var.sqrt()))
}

/// Weighted Weibull MLE from the profile equation
/// Σw xᵏ ln x / Σw xᵏ − 1/k − Σw ln x / Σw = 0, which is increasing in k.
/// Returns (k, λ) with λ = (Σw xᵏ / Σw)^(1/k).
pub fn weibull_weighted_mle(x: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    if x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("weibull fit needs positive data".into()));
    }
    let y: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let sw: f64 = w.iter().copied().collect::<CompensatedSum>().value();
    if !(sw > 0.0) {
        return Err(Error::DegenerateData("zero total weight".into()));
    }
    let ybar = y.iter().zip(w).map(|(y, w)| w * y).collect::<CompensatedSum>().value() / sw;
    let yvar = y
        .iter()
        .zip(w)
        .map(|(y, w)| w * (y - ybar) * (y - ybar))
        .collect::<CompensatedSum>()
        .value()
        / sw;
    if !(yvar > 1e-300) {
        return Err(Error::DegenerateData("zero variance of log data".into()));
    }
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // tilted moments of y under weights w·exp(k(y − ymax))
    let tilted = |k: f64| {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (yi, wi) in y.iter().zip(w) {
            let e = wi * (k * (yi - ymax)).exp();
            s0 += e;
            s1 += e * yi;
            s2 += e * yi * yi;
        }
        (s0, s1 / s0, s2 / s0)
    };
    let resid = |k: f64| {
        let (_, m1, _) = tilted(k);
        m1 - 1.0 / k - ybar
    };
    let slope = |k: f64| {
        let (_, m1, m2) = tilted(k);
        (m2 - m1 * m1).max(0.0) + 1.0 / (k * k)
    };
    let start = (std::f64::consts::PI / (6.0 * yvar).sqrt()).clamp(1e-3, 1e3);
    let k = solve_increasing(resid, slope, 1e-8, f64::INFINITY, start, SHAPE_TOL)?;
    let (s0, _, _) = tilted(k);
    let lambda = (ymax + (s0 / sw).ln() / k).exp();
    Ok((k, lambda))
}

/// Closed-form normal MLE with standard errors from observed information.
pub fn fit_normal(data: &DataSet) -> Result<FitResult> {
    let w = vec![1.0; data.n()];
    let (mu, sigma) = normal_weighted_mle(data.observations(), &w)?;
    baseline_fit("N", Normal::new(mu, sigma)?, data, 0)
}

/// Weibull MLE by Newton iteration on the profile shape equation.
pub fn fit_weibull(data: &DataSet) -> Result<FitResult> {
    let w = vec![1.0; data.n()];
    let (k, lambda) = weibull_weighted_mle(data.observations(), &w)?;
    baseline_fit("W", Weibull::new(k, lambda)?, data, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_closed_form() {
        let d = DataSet::new(vec![1.0, 2.0, 3.0], "t").unwrap();
        let f = fit_normal(&d).unwrap();
        let v = f.estimates.values();
        assert_relative_eq!(v[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(v[1], (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        let se = f.std_errors.unwrap();
        assert_relative_eq!(se[0], v[1] / 3f64.sqrt(), max_relative = 1e-10);
        assert_relative_eq!(se[1], v[1] / 6f64.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn degenerate_data() {
        let d = DataSet::new(vec![2.0; 5], "t").unwrap();
        assert!(matches!(fit_normal(&d), Err(Error::DegenerateData(_))));
        assert!(matches!(fit_weibull(&d), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn weibull_score_vanishes() {
        let x: Vec<f64> = (1..=40).map(|i| (i as f64 * 0.37).sin().abs() * 3.0 + 0.1).collect();
        let d = DataSet::new(x.clone(), "t").unwrap();
        let f = fit_weibull(&d).unwrap();
        let v = f.estimates.values();
        let ll = |k: f64, l: f64| -> f64 {
            let b = Weibull::new(k, l).unwrap();
            x.iter().map(|&xi| b.log_pdf(xi).unwrap()).sum()
        };
        let h = 1e-6;
        let gk = (ll(v[0] + h, v[1]) - ll(v[0] - h, v[1])) / (2.0 * h);
        let gl = (ll(v[0], v[1] + h) - ll(v[0], v[1] - h)) / (2.0 * h);
        assert!(gk.abs() < 1e-5 && gl.abs() < 1e-5, "{gk} {gl}");
    }

    #[test]
    fn weights_act_as_replication() {
        let x = [0.5, 1.2, 2.0, 3.3];
        let (k1, l1) = weibull_weighted_mle(&x, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let rep = [0.5, 0.5, 1.2, 2.0, 3.3, 3.3, 3.3];
        let (k2, l2) = weibull_weighted_mle(&rep, &[1.0; 7]).unwrap();
        assert_relative_eq!(k1, k2, max_relative = 1e-9);
        assert_relative_eq!(l1, l2, max_relative = 1e-9);
    }
}
