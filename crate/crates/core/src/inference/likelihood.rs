//! Per-observation log-density, score and Hessian of the composed model.
//!
//! With f = T₁ + T₂, T₁ = φ(z)·g₁/(1−G₁)², z = G₁/(1−G₁) and
//! T₂ = φ(w)·g₂/(1−G₂), w = log(1−G₂), the score is ∇T/f and the Hessian of
//! log f is blockdiag(∇²T₁, ∇²T₂)/f − (∇T/f)(∇T/f)ᵀ. T₁ depends only on θ₁
//! and T₂ only on θ₂, so the cross blocks reduce to −(∇T₁/f)(∇T₂/f)ᵀ.
//! Ratios φ(·)/f are formed in the log domain; a term whose ratio
//! underflows contributes nothing.

use crate::baselines::{Baseline, DerivOrder, DerivTable, MAX_BASE_PARAMS};
use crate::composed::ComposedModel;
use crate::error::{Error, Result};
use crate::parallel::{reduce_chunks, Exec};
use crate::special::{log_add_exp, std_normal_log_pdf, CompensatedSum};

use super::DataSet;

const MAX_P: usize = 2 * MAX_BASE_PARAMS;

/// log f, ∇ log f and ∇² log f at one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsTerms {
    pub n_params: usize,
    pub log_density: f64,
    pub grad: [f64; MAX_P],
    pub hess: [[f64; MAX_P]; MAX_P],
}

/// ∇T/ρ and ∇²T/ρ of one term, where ρ is the φ(·)/f ratio.
struct TermDerivs {
    grad: [f64; MAX_BASE_PARAMS],
    hess: [[f64; MAX_BASE_PARAMS]; MAX_BASE_PARAMS],
}

/// T₁ = φ(z)·h with h = g/S², z = G/S.
fn odds_term(d: &DerivTable, z: f64, order: DerivOrder) -> TermDerivs {
    let p = d.n_params;
    let (g, s) = (d.pdf, d.sf);
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s2 * s2;
    let h = g / s2;
    let mut z1 = [0.0; MAX_BASE_PARAMS];
    let mut h1 = [0.0; MAX_BASE_PARAMS];
    let mut grad = [0.0; MAX_BASE_PARAMS];
    for j in 0..p {
        z1[j] = d.d_cdf[j] / s2;
        h1[j] = d.d_pdf[j] / s2 + 2.0 * g * d.d_cdf[j] / s3;
        grad[j] = h1[j] - z * z1[j] * h;
    }
    let mut hess = [[0.0; MAX_BASE_PARAMS]; MAX_BASE_PARAMS];
    if order == DerivOrder::Second {
        for j in 0..p {
            for k in 0..=j {
                let (gj, gk) = (d.d_cdf[j], d.d_cdf[k]);
                let z2 = d.d2_cdf[j][k] / s2 + 2.0 * gj * gk / s3;
                let h2 = d.d2_pdf[j][k] / s2
                    + 2.0 * (d.d_pdf[j] * gk + d.d_pdf[k] * gj) / s3
                    + 2.0 * g * d.d2_cdf[j][k] / s3
                    + 6.0 * g * gj * gk / s4;
                let v = -z * z1[k] * grad[j] + h2 - z1[k] * z1[j] * h - z * z2 * h - z * z1[j] * h1[k];
                hess[j][k] = v;
                hess[k][j] = v;
            }
        }
    }
    TermDerivs { grad, hess }
}

/// T₂ = φ(w)·q with q = g/S, w = log S.
fn log_term(d: &DerivTable, w: f64, order: DerivOrder) -> TermDerivs {
    let p = d.n_params;
    let (g, s) = (d.pdf, d.sf);
    let s2 = s * s;
    let s3 = s2 * s;
    let q = g / s;
    let mut w1 = [0.0; MAX_BASE_PARAMS];
    let mut q1 = [0.0; MAX_BASE_PARAMS];
    let mut grad = [0.0; MAX_BASE_PARAMS];
    for j in 0..p {
        w1[j] = -d.d_cdf[j] / s;
        q1[j] = d.d_pdf[j] / s + g * d.d_cdf[j] / s2;
        grad[j] = q1[j] - w * w1[j] * q;
    }
    let mut hess = [[0.0; MAX_BASE_PARAMS]; MAX_BASE_PARAMS];
    if order == DerivOrder::Second {
        for j in 0..p {
            for k in 0..=j {
                let (gj, gk) = (d.d_cdf[j], d.d_cdf[k]);
                let w2 = -d.d2_cdf[j][k] / s - gj * gk / s2;
                let q2 = d.d2_pdf[j][k] / s
                    + (d.d_pdf[j] * gk + d.d_pdf[k] * gj) / s2
                    + g * d.d2_cdf[j][k] / s2
                    + 2.0 * g * gj * gk / s3;
                let v = -w * w1[k] * grad[j] + q2 - w1[k] * w1[j] * q - w * w2 * q - w * w1[j] * q1[k];
                hess[j][k] = v;
                hess[k][j] = v;
            }
        }
    }
    TermDerivs { grad, hess }
}

impl<B1: Baseline, B2: Baseline> ComposedModel<B1, B2> {
    /// log f and its parameter derivatives at a single observation.
    pub fn obs_terms(&self, x: f64, order: DerivOrder) -> Result<ObsTerms> {
        let r = self.split();
        let p = self.n_params();
        if !self.support().interior_contains(x) {
            return Err(Error::DataSupport { index: 0, x });
        }
        let (t1, t2) = self.term_log_densities(x)?;
        let lf = log_add_exp(t1, t2);
        if !lf.is_finite() {
            return Err(Error::DataSupport { index: 0, x });
        }
        let mut grad = [0.0; MAX_P];
        let mut hess = [[0.0; MAX_P]; MAX_P];

        let z = self.g1().odds(x);
        let rho1 = if t1 == f64::NEG_INFINITY {
            0.0
        } else {
            (std_normal_log_pdf(z) - lf).exp()
        };
        if rho1 > 0.0 {
            let d1 = self.g1().derivs(x, order)?;
            let t = odds_term(&d1, z, order);
            for j in 0..r {
                grad[j] = rho1 * t.grad[j];
                for k in 0..r {
                    hess[j][k] = rho1 * t.hess[j][k];
                }
            }
        }

        let w = self.g2().log_sf(x);
        let rho2 = if t2 == f64::NEG_INFINITY {
            0.0
        } else {
            (std_normal_log_pdf(w) - lf).exp()
        };
        if rho2 > 0.0 {
            let d2 = self.g2().derivs(x, order)?;
            let t = log_term(&d2, w, order);
            for j in 0..p - r {
                grad[r + j] = rho2 * t.grad[j];
                for k in 0..p - r {
                    hess[r + j][r + k] = rho2 * t.hess[j][k];
                }
            }
        }

        if order == DerivOrder::Second {
            for j in 0..p {
                for k in 0..p {
                    hess[j][k] -= grad[j] * grad[k];
                }
            }
        }
        Ok(ObsTerms {
            n_params: p,
            log_density: lf,
            grad,
            hess,
        })
    }
}

fn with_index(e: Error, index: usize) -> Error {
    match e {
        Error::DataSupport { x, .. } => Error::DataSupport { index, x },
        other => other,
    }
}

/// Σᵢ log f(xᵢ).
pub fn log_likelihood<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    data: &DataSet,
    exec: Exec,
) -> Result<f64> {
    let obs = data.observations();
    let total = reduce_chunks(
        exec,
        obs.len(),
        |range| {
            let mut acc = CompensatedSum::new();
            for i in range {
                let x = obs[i];
                if !model.support().interior_contains(x) {
                    return Err(Error::DataSupport { index: i, x });
                }
                let lf = model.log_pdf(x).map_err(|e| with_index(e, i))?;
                if !lf.is_finite() {
                    return Err(Error::DataSupport { index: i, x });
                }
                acc.add(lf);
            }
            Ok(acc)
        },
        |mut a, b| {
            a.add(b.value());
            a
        },
    )?;
    Ok(total.map(|s| s.value()).unwrap_or(0.0))
}

struct Accum {
    loglik: CompensatedSum,
    grad: [CompensatedSum; MAX_P],
    hess: [[f64; MAX_P]; MAX_P],
}

fn accumulate<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    data: &DataSet,
    order: DerivOrder,
    exec: Exec,
) -> Result<Accum> {
    let obs = data.observations();
    let p = model.n_params();
    let acc = reduce_chunks(
        exec,
        obs.len(),
        |range| {
            let mut a = Accum {
                loglik: CompensatedSum::new(),
                grad: [CompensatedSum::new(); MAX_P],
                hess: [[0.0; MAX_P]; MAX_P],
            };
            for i in range {
                let t = model.obs_terms(obs[i], order).map_err(|e| with_index(e, i))?;
                a.loglik.add(t.log_density);
                for j in 0..p {
                    a.grad[j].add(t.grad[j]);
                    for k in 0..p {
                        a.hess[j][k] += t.hess[j][k];
                    }
                }
            }
            Ok(a)
        },
        |mut a, b| {
            a.loglik.add(b.loglik.value());
            for j in 0..p {
                a.grad[j].add(b.grad[j].value());
                for k in 0..p {
                    a.hess[j][k] += b.hess[j][k];
                }
            }
            a
        },
    )?;
    acc.ok_or_else(|| Error::Domain("empty data set".into()))
}

/// Log-likelihood and score in one pass.
pub fn loglik_and_score<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    data: &DataSet,
    exec: Exec,
) -> Result<(f64, Vec<f64>)> {
    let a = accumulate(model, data, DerivOrder::First, exec)?;
    let grad = a.grad[..model.n_params()].iter().map(|g| g.value()).collect();
    Ok((a.loglik.value(), grad))
}

/// Score vector ∇θ ℓ.
pub fn score<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    data: &DataSet,
    exec: Exec,
) -> Result<Vec<f64>> {
    Ok(loglik_and_score(model, data, exec)?.1)
}

/// Observed information J = −∇∇ᵀℓ, symmetric by construction.
pub fn observed_information<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    data: &DataSet,
    exec: Exec,
) -> Result<Vec<Vec<f64>>> {
    let p = model.n_params();
    let a = accumulate(model, data, DerivOrder::Second, exec)?;
    let mut j = vec![vec![0.0; p]; p];
    for r in 0..p {
        for c in 0..=r {
            let v = -0.5 * (a.hess[r][c] + a.hess[c][r]);
            j[r][c] = v;
            j[c][r] = v;
        }
    }
    Ok(j)
}
