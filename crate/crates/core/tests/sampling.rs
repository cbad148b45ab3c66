use ngg_core::rng::stream;
use ngg_core::sampling::{build_envelope, grid_envelope, propose, sample, sample_with_envelope};
use ngg_core::series::{raw_moment, MomentMethod};
use ngg_core::special::std_normal_sf;
use ngg_core::{Baseline, ComposedModel, Exec, Normal, NwwModel, Weibull};

const SETS: [[f64; 4]; 4] = [[1.3, 2.0, 1.5, 1.8], [3.0, 1.5, 2.8, 2.5], [2.0, 2.2, 6.5, 4.1], [1.4, 1.6, 4.8, 5.1]];

fn model(t: [f64; 4]) -> NwwModel {
    NwwModel::nww(t[0], t[1], t[2], t[3]).unwrap()
}

fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn envelope_dominates_density_on_audit_grid() {
    for t in SETS {
        let m = model(t);
        let env = build_envelope(&m).unwrap();
        let pts = 100_000;
        for i in 0..=pts {
            let x = env.x_lo + (env.x_hi - env.x_lo) * i as f64 / pts as f64;
            let f = m.pdf(x).unwrap_or(0.0);
            assert!(f <= env.y_max * (1.0 + 1e-12), "{t:?} x={x}: pdf {f} > y_max {}", env.y_max);
        }
    }
}

#[test]
fn weibull_envelope_finds_mode_density() {
    for (k, l) in [(1.5, 2.0), (3.0, 1.0), (6.5, 4.1)] {
        let w = Weibull::new(k, l).unwrap();
        let env = grid_envelope(|x| w.pdf(x), w.quantile(1e-10).unwrap(), w.quantile(1.0 - 1e-10).unwrap()).unwrap();
        let at_mode = w.pdf(w.mode()).unwrap();
        assert!((env.y_max - at_mode).abs() <= 1e-3 * at_mode, "({k},{l}): {} vs {at_mode}", env.y_max);
    }
}

#[test]
fn normal_composed_argmax_within_one_cell() {
    let m = ComposedModel::new(Normal::new(2.0, 1.0).unwrap(), Normal::new(3.0, 0.8).unwrap()).unwrap();
    let env = build_envelope(&m).unwrap();
    let pts = 1_000_000;
    let (mut best_x, mut best_f) = (env.x_lo, 0.0);
    for i in 0..=pts {
        let x = env.x_lo + (env.x_hi - env.x_lo) * i as f64 / pts as f64;
        let f = m.pdf(x).unwrap();
        if f > best_f {
            best_x = x;
            best_f = f;
        }
    }
    let cell = (env.x_hi - env.x_lo) / 10_000.0;
    assert!((env.argmax - best_x).abs() <= cell, "{} vs {best_x}", env.argmax);
}

#[test]
fn draws_follow_the_cdf() {
    for (i, t) in SETS.into_iter().enumerate() {
        let m = model(t);
        let out = sample(&m, 100_000, 100 + i as u64).unwrap();
        let d = ks_distance(out.values, |x| m.cdf(x));
        assert!(d <= 0.01, "{t:?}: KS {d}");
    }
}

#[test]
fn acceptance_rate_matches_envelope_area() {
    for t in SETS {
        let m = model(t);
        let env = build_envelope(&m).unwrap();
        let out = sample_with_envelope(&m, &env, 200_000, 5, Exec::default()).unwrap();
        let expected = env.expected_acceptance();
        assert!(
            ((out.acceptance_rate - expected) / expected).abs() <= 0.02,
            "{t:?}: {} vs {expected}",
            out.acceptance_rate
        );
    }
}

#[test]
fn sample_mean_within_four_standard_errors() {
    let n = 1_000_000;
    for t in SETS {
        let m = model(t);
        let m1 = raw_moment(&m, 1, MomentMethod::Quadrature).unwrap();
        let m2 = raw_moment(&m, 2, MomentMethod::Quadrature).unwrap();
        let se = ((m2 - m1 * m1) / n as f64).sqrt();
        let mean = sample(&m, n, 77).unwrap().values.iter().sum::<f64>() / n as f64;
        assert!((mean - m1).abs() <= 4.0 * se, "{t:?}: mean {mean} vs {m1} (se {se})");
    }
}

/// Two-sided Wald–Wolfowitz runs test p-value.
fn runs_p_value(signs: &[bool]) -> f64 {
    let n1 = signs.iter().filter(|&&s| s).count() as f64;
    let n = signs.len() as f64;
    let n2 = n - n1;
    let runs = 1.0 + signs.windows(2).filter(|w| w[0] != w[1]).count() as f64;
    let mu = 2.0 * n1 * n2 / n + 1.0;
    let var = (mu - 1.0) * (mu - 2.0) / (n - 1.0);
    2.0 * std_normal_sf(((runs - mu) / var.sqrt()).abs())
}

#[test]
fn acceptance_indicators_show_no_serial_pattern() {
    for t in SETS {
        let m = model(t);
        let env = build_envelope(&m).unwrap();
        let mut rng = stream(11);
        let accepted: Vec<bool> = (0..100_000).map(|_| propose(&m, &env, &mut rng).1).collect();
        let p = runs_p_value(&accepted);
        assert!(p > 0.001, "{t:?}: runs p-value {p}");
    }
}

#[test]
fn draws_show_no_serial_pattern() {
    for t in SETS {
        let xs = sample(&model(t), 20_000, 11).unwrap().values;
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let signs: Vec<bool> = xs.iter().filter(|&&x| x != median).map(|&x| x > median).collect();
        let p = runs_p_value(&signs);
        assert!(p > 0.001, "{t:?}: runs p-value {p}");
    }
}

#[test]
fn parallel_and_sequential_draws_agree() {
    let m = model(SETS[2]);
    let env = build_envelope(&m).unwrap();
    let a = sample_with_envelope(&m, &env, 10_000, 9, Exec::Sequential).unwrap();
    let b = sample_with_envelope(&m, &env, 10_000, 9, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}
