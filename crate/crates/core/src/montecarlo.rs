//! Replicated sample–fit studies reporting bias and MSE per parameter.

use serde::{Deserialize, Serialize};

use crate::baselines::Baseline;
use crate::composed::ComposedModel;
use crate::error::{Error, Result};
use crate::inference::{fit_mle, fit_mle_from, DataSet, FitOptions};
use crate::parallel::{map_indexed, Exec};
use crate::params::ParamVector;
use crate::rng::derive_seed;
use crate::sampling::{build_envelope, sample_with_envelope};
use crate::special::CompensatedSum;

/// Replication count used when none is given.
pub const DEFAULT_REPS: usize = 500;
/// Largest failed-fit fraction for which a report is still valid.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;
pub const MIN_SAMPLE_SIZE: usize = 10;

/// Where each replication's optimizer starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StartPolicy {
    /// Single local fit from the generating parameters.
    #[default]
    Truth,
    /// Data-driven multi-start search for the global maximum.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub start: StartPolicy,
    /// Settings for each fit; the seed is replaced per replication.
    pub fit: FitOptions,
    /// Scheduling of replications. Each replication runs sequentially inside.
    pub exec: Exec,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            start: StartPolicy::default(),
            fit: FitOptions {
                exec: Exec::Sequential,
                ..FitOptions::default()
            },
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: ParamVector,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    /// Rows follow `sample_sizes`, columns follow `scenario`.
    pub bias: Vec<Vec<f64>>,
    pub mse: Vec<Vec<f64>>,
    /// Mean of |θ̂ − θ|, reported alongside the signed bias.
    pub mean_abs_error: Vec<Vec<f64>>,
    pub failures: Vec<usize>,
    pub valid: bool,
}

/// Seed of replication `rep` at size index `size_index`.
pub fn replication_seed(seed: u64, size_index: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(seed, size_index as u64), rep as u64)
}

/// Sample, fit, and record θ̂ − θ for every replication and size.
///
/// Failed fits are excluded from the averages and counted. Results do not
/// depend on scheduling: every replication owns its seed and aggregation
/// runs in replication order.
pub fn run_study<B1: Baseline, B2: Baseline>(
    truth: &ComposedModel<B1, B2>,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    opts: &StudyOptions,
) -> Result<SimulationReport> {
    if reps == 0 {
        return Err(Error::Domain("replications must be >= 1".into()));
    }
    if sizes.is_empty() {
        return Err(Error::Domain("at least one sample size is required".into()));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n < MIN_SAMPLE_SIZE) {
        return Err(Error::Domain(format!("sample size {n} is below {MIN_SAMPLE_SIZE}")));
    }
    let env = build_envelope(truth)?;
    let theta = truth.theta();
    let p = theta.len();

    let mut bias = Vec::with_capacity(sizes.len());
    let mut mse = Vec::with_capacity(sizes.len());
    let mut mae = Vec::with_capacity(sizes.len());
    let mut failures = Vec::with_capacity(sizes.len());
    for (si, &n) in sizes.iter().enumerate() {
        let errors: Vec<Result<Vec<f64>>> = map_indexed(opts.exec, reps, |r| {
            let rs = replication_seed(seed, si, r);
            let draws = sample_with_envelope(truth, &env, n, derive_seed(rs, 0), Exec::Sequential)?;
            let data = DataSet::new(draws.values, "simulated")?;
            let fit_opts = FitOptions {
                seed: derive_seed(rs, 1),
                ..opts.fit
            };
            let fit = match opts.start {
                StartPolicy::Truth => fit_mle_from(truth, &data, std::slice::from_ref(&theta), &fit_opts)?,
                StartPolicy::Global => fit_mle(truth, &data, &fit_opts)?,
            };
            Ok(fit.estimates.values().iter().zip(&theta).map(|(e, t)| e - t).collect())
        });
        let mut sum_d = vec![CompensatedSum::default(); p];
        let mut sum_d2 = vec![CompensatedSum::default(); p];
        let mut sum_abs = vec![CompensatedSum::default(); p];
        let mut ok = 0usize;
        for d in errors.into_iter().flatten() {
            ok += 1;
            for j in 0..p {
                sum_d[j].add(d[j]);
                sum_d2[j].add(d[j] * d[j]);
                sum_abs[j].add(d[j].abs());
            }
        }
        let denom = ok as f64;
        let row = |s: &[CompensatedSum]| -> Vec<f64> {
            s.iter().map(|c| if ok == 0 { f64::NAN } else { c.value() / denom }).collect()
        };
        let b = row(&sum_d);
        let mut m = row(&sum_d2);
        if ok == 1 {
            // a single replication has mse = bias² exactly
            m = b.iter().map(|v| v * v).collect();
        }
        bias.push(b);
        mse.push(m);
        mae.push(row(&sum_abs));
        failures.push(reps - ok);
    }
    let valid = failures
        .iter()
        .all(|&f| (f as f64) <= MAX_FAILURE_FRACTION * reps as f64);
    Ok(SimulationReport {
        scenario: truth.params(),
        sample_sizes: sizes.to_vec(),
        replications: reps,
        bias,
        mse,
        mean_abs_error: mae,
        failures,
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composed::NwwModel;

    fn quick() -> StudyOptions {
        StudyOptions {
            start: StartPolicy::Global,
            fit: FitOptions {
                starts: 2,
                exec: Exec::Sequential,
                ..FitOptions::default()
            },
            exec: Exec::default(),
        }
    }

    #[test]
    fn single_replication_identity() {
        let m = NwwModel::nww(1.3, 2.0, 1.5, 1.8).unwrap();
        let r = run_study(&m, &[50], 1, 11, &quick()).unwrap();
        if r.failures[0] == 0 {
            for (b, m) in r.bias[0].iter().zip(&r.mse[0]) {
                assert_eq!(*m, b * b);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = NwwModel::nww(1.3, 2.0, 1.5, 1.8).unwrap();
        assert!(run_study(&m, &[50], 0, 1, &quick()).is_err());
        assert!(run_study(&m, &[5], 3, 1, &quick()).is_err());
        assert!(run_study(&m, &[], 3, 1, &quick()).is_err());
    }

    #[test]
    fn scheduling_does_not_change_report() {
        let m = NwwModel::nww(1.4, 1.6, 4.8, 5.1).unwrap();
        let mut o = quick();
        let par = run_study(&m, &[30], 8, 5, &o).unwrap();
        o.exec = Exec::Sequential;
        let seq = run_study(&m, &[30], 8, 5, &o).unwrap();
        assert_eq!(par, seq);
        assert!(par.mse[0].iter().zip(&par.bias[0]).all(|(m, b)| *m >= b * b - 1e-12));
    }
}
