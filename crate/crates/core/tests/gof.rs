use ngg_core::gof::{
    ad_cvm_statistics, compare_models, fit_mixture_em, fit_weibull, information_criteria, is_monotone, CompareOptions,
    EmOptions, MixtureFamily, ModelKind,
};
use ngg_core::inference::DataSet;
use ngg_core::rng::stream;
use ngg_core::{Baseline, Normal, Weibull};
use proptest::prelude::*;
use rand::Rng;

fn inverse_cdf_draws<B: Baseline>(b: &B, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed);
    (0..n).map(|_| b.quantile(rng.random_range(1e-12..1.0 - 1e-12)).unwrap()).collect()
}

fn normal_mixture_draws(n: usize, seed: u64) -> Vec<f64> {
    let a = Normal::new(2.5, 0.5).unwrap();
    let b = Normal::new(5.2, 1.1).unwrap();
    let mut rng = stream(seed);
    (0..n)
        .map(|_| {
            let u = rng.random_range(1e-12..1.0 - 1e-12);
            if rng.random::<f64>() < 0.5 {
                a.quantile(u).unwrap()
            } else {
                b.quantile(u).unwrap()
            }
        })
        .collect()
}

fn data(v: Vec<f64>) -> DataSet {
    DataSet::new(v, "synthetic").unwrap()
}

#[test]
fn table6_nww_row_from_back_solved_loglik() {
    let ic = information_criteria(-94658.25, 4, 72637).unwrap();
    for (got, want) in [(ic.aic, 189324.5), (ic.caic, 189365.2), (ic.bic, 189361.2), (ic.hqic, 189335.8)] {
        assert!((got - want).abs() <= 0.1, "{got} vs {want}");
    }
}

/// Expanded-sum forms of W² and A², written independently of the library.
fn brute_force(u: &[f64]) -> (f64, f64) {
    let n = u.len() as f64;
    let mut w2 = n / 3.0;
    let mut a2 = -n;
    for (k, &ui) in u.iter().enumerate() {
        let i = (k + 1) as f64;
        w2 += ui * ui - (2.0 * i - 1.0) / n * ui;
        a2 -= ((2.0 * i - 1.0) * ui.ln() + (2.0 * n + 1.0 - 2.0 * i) * (1.0 - ui).ln()) / n;
    }
    (a2 * (1.0 + 0.75 / n + 2.25 / (n * n)), w2 * (1.0 + 0.5 / n))
}

#[test]
fn edf_statistics_match_brute_force() {
    let u: Vec<f64> = (1..=19).map(|i| 0.05 * i as f64).collect();
    let squared: Vec<f64> = u.iter().map(|v| v * v).collect();
    for probs in [&u, &squared] {
        let s = ad_cvm_statistics(probs).unwrap();
        let (a, w) = brute_force(probs);
        assert!((s.a_star - a).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {a}", s.a_star);
        assert!((s.w_star - w).abs() <= 1e-12 * w.abs().max(1.0), "{} vs {w}", s.w_star);
        assert_eq!(s.clamped, 0);
    }
    let even = ad_cvm_statistics(&u).unwrap();
    let skewed = ad_cvm_statistics(&squared).unwrap();
    assert!(skewed.a_star > even.a_star);
    assert!(skewed.w_star > even.w_star);
}

#[test]
fn edf_rejects_bad_input() {
    assert!(ad_cvm_statistics(&[]).is_err());
    assert!(ad_cvm_statistics(&[0.5, 0.2]).is_err());
    assert!(ad_cvm_statistics(&[0.2, 1.5]).is_err());
    assert_eq!(ad_cvm_statistics(&[0.0, 0.5, 1.0]).unwrap().clamped, 2);
}

proptest! {
    #[test]
    fn criteria_ordering_for_large_samples(loglik in -1e6f64..1e3, k in 1usize..12, n in 5000usize..2_000_000) {
        let ic = information_criteria(loglik, k, n).unwrap();
        prop_assert!(ic.aic <= ic.hqic);
        prop_assert!(ic.hqic <= ic.bic);
        prop_assert!(ic.bic <= ic.caic);
    }
}

#[test]
fn weibull_fit_recovers_parameters() {
    let w = Weibull::new(1.77, 3.45).unwrap();
    let fit = fit_weibull(&data(inverse_cdf_draws(&w, 100_000, 1))).unwrap();
    let est = fit.estimates.values();
    let se = fit.std_errors.unwrap();
    for (j, truth) in [1.77, 3.45].into_iter().enumerate() {
        assert!((est[j] - truth).abs() <= 3.0 * se[j], "param {j}: {} ± {}", est[j], se[j]);
    }
}

#[test]
fn exponential_data_gives_unit_shape() {
    let e = Weibull::new(1.0, 2.0).unwrap();
    let fit = fit_weibull(&data(inverse_cdf_draws(&e, 20_000, 2))).unwrap();
    let k = fit.estimates.values()[0];
    assert!((k - 1.0).abs() <= 3.0 * fit.std_errors.unwrap()[0], "{k}");
}

#[test]
fn normal_mixture_recovery() {
    let fit = fit_mixture_em(&data(normal_mixture_draws(10_000, 3)), MixtureFamily::Normal, &EmOptions::default()).unwrap();
    assert!(is_monotone(&fit.history));
    let est = fit.result.estimates.values();
    let se = fit.result.std_errors.clone().unwrap();
    for (j, truth) in [0.5, 2.5, 0.5, 5.2, 1.1].into_iter().enumerate() {
        assert!((est[j] - truth).abs() <= 3.0 * se[j], "param {j}: {} ± {} vs {truth}", est[j], se[j]);
    }
}

#[test]
fn em_is_monotone_and_labels_are_canonical() {
    let d = data(normal_mixture_draws(2_000, 4));
    let mut thetas = Vec::new();
    for seed in 0..4 {
        let opts = EmOptions { seed, ..EmOptions::default() };
        for family in [MixtureFamily::Normal, MixtureFamily::Weibull] {
            let fit = fit_mixture_em(&d, family, &opts).unwrap();
            assert!(is_monotone(&fit.history), "{family:?} seed {seed}");
            if family == MixtureFamily::Normal {
                thetas.push(fit.model.theta());
            }
        }
    }
    for t in &thetas {
        assert!(t[1] < t[3]);
        for j in 0..5 {
            assert!((t[j] - thetas[0][j]).abs() <= 1e-4 * thetas[0][j].abs().max(1.0), "{t:?} vs {:?}", thetas[0]);
        }
    }
}

#[test]
fn pure_weibull_data_favours_weibull() {
    let w = Weibull::new(2.5, 3.0).unwrap();
    let d = data(inverse_cdf_draws(&w, 5_000, 5));
    let rows = compare_models(&d, &ModelKind::ALL, &CompareOptions::default()).unwrap();
    let best = rows[0].gof.as_ref().unwrap().aic;
    let weibull = rows.iter().find(|r| r.model == ModelKind::Weibull).unwrap();
    assert!(weibull.gof.as_ref().unwrap().aic - best <= 4.0);
    let ranks: Vec<usize> = rows.iter().filter_map(|r| r.rank).collect();
    assert_eq!(ranks, (1..=ranks.len()).collect::<Vec<_>>());

    let single = compare_models(&d, &[ModelKind::Weibull], &CompareOptions::default()).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].rank, Some(1));
}
