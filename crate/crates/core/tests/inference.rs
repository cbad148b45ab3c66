use ngg_core::inference::optimizer::{minimize_box, OptimizerOptions};
use ngg_core::inference::{
    fit_mle_from, log_likelihood, loglik_and_score, observed_information, DataSet, FitOptions,
};
use ngg_core::montecarlo::replication_seed;
use ngg_core::sampling::sample;
use ngg_core::{Exec, NwwModel};
use proptest::prelude::*;

fn draws(theta: [f64; 4], n: usize, seed: u64) -> DataSet {
    let m = NwwModel::nww(theta[0], theta[1], theta[2], theta[3]).unwrap();
    DataSet::new(sample(&m, n, seed).unwrap().values, "draws").unwrap()
}

fn loglik_at(m: &NwwModel, theta: &[f64], data: &DataSet) -> f64 {
    log_likelihood(&m.with_theta(theta).unwrap(), data, Exec::Sequential).unwrap()
}

fn theta_strategy() -> impl Strategy<Value = [f64; 4]> {
    (0.7f64..4.0, 0.7f64..4.0, 0.7f64..4.0, 0.7f64..4.0).prop_map(|(a, b, c, d)| [a, b, c, d])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn score_matches_finite_differences(theta in theta_strategy(), seed in 0u64..1000) {
        let data = draws([1.3, 2.0, 1.5, 1.8], 50, seed);
        let m = NwwModel::nww(theta[0], theta[1], theta[2], theta[3]).unwrap();
        let (_, g) = loglik_and_score(&m, &data, Exec::Sequential).unwrap();
        for j in 0..4 {
            let h = 1e-6 * theta[j];
            let mut up = theta;
            up[j] += h;
            let mut dn = theta;
            dn[j] -= h;
            let fd = (loglik_at(&m, &up, &data) - loglik_at(&m, &dn, &data)) / (2.0 * h);
            prop_assert!((fd - g[j]).abs() <= 1e-4 * g[j].abs().max(1.0), "j={} fd={} analytic={}", j, fd, g[j]);
        }
    }

    #[test]
    fn information_matches_numerical_hessian(theta in theta_strategy(), seed in 0u64..1000) {
        let data = draws([1.3, 2.0, 1.5, 1.8], 50, seed);
        let m = NwwModel::nww(theta[0], theta[1], theta[2], theta[3]).unwrap();
        let info = observed_information(&m, &data, Exec::Sequential).unwrap();
        let mut diff = 0.0;
        let mut norm = 0.0;
        for j in 0..4 {
            let h = 1e-6 * theta[j];
            let mut up = theta;
            up[j] += h;
            let mut dn = theta;
            dn[j] -= h;
            let gu = loglik_and_score(&m.with_theta(&up).unwrap(), &data, Exec::Sequential).unwrap().1;
            let gd = loglik_and_score(&m.with_theta(&dn).unwrap(), &data, Exec::Sequential).unwrap().1;
            for k in 0..4 {
                let numeric = -(gu[k] - gd[k]) / (2.0 * h);
                diff += (numeric - info[j][k]).powi(2);
                norm += info[j][k].powi(2);
            }
            for k in 0..4 {
                prop_assert_eq!(info[j][k], info[k][j]);
            }
        }
        prop_assert!(diff.sqrt() <= 1e-4 * norm.sqrt().max(1.0), "frobenius gap {} of {}", diff.sqrt(), norm.sqrt());
    }
}

#[test]
fn optimizer_never_decreases_loglik() {
    for seed in 0..10 {
        let data = draws([2.0, 2.2, 6.5, 4.1], 300, seed);
        let m = NwwModel::nww(1.0, 1.0, 1.0, 1.0).unwrap();
        let objective = |th: &[f64]| {
            let mm = m.with_theta(th).ok()?;
            let (l, g) = loglik_and_score(&mm, &data, Exec::Sequential).ok()?;
            Some((-l, g.iter().map(|v| -v).collect()))
        };
        let r = minimize_box(objective, &[1.0, 3.0, 1.0, 5.0], &[1e-3; 4], &[1e3; 4], &OptimizerOptions::default());
        assert!(r.converged(), "{:?}", r.reason);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: {:?}", r.history);
    }
}

#[test]
fn studentized_estimates_are_near_standard_normal() {
    let truth = [2.0, 2.2, 6.5, 4.1];
    let reps = 500;
    let opts = FitOptions { exec: Exec::Sequential, ..FitOptions::default() };
    let z: Vec<[f64; 4]> = (0..reps)
        .filter_map(|r| {
            let rs = replication_seed(2024, 0, r);
            let data = draws(truth, 500, rs);
            let template = NwwModel::nww(1.0, 1.0, 1.0, 1.0).unwrap();
            let fit = fit_mle_from(&template, &data, &[truth.to_vec()], &opts).ok()?;
            let se = fit.std_errors?;
            let est = fit.estimates.values();
            Some(std::array::from_fn(|j| (est[j] - truth[j]) / se[j]))
        })
        .collect();
    assert!(z.len() >= reps * 95 / 100);
    for j in 0..4 {
        let n = z.len() as f64;
        let mean = z.iter().map(|v| v[j]).sum::<f64>() / n;
        let sd = (z.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((0.8..=1.25).contains(&sd), "param {j}: sd {sd}");
    }
}
