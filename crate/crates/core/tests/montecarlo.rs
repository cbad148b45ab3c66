use ngg_core::montecarlo::{run_study, SimulationReport, StudyOptions};
use ngg_core::{Exec, NwwModel};

const SCENARIOS: [[f64; 4]; 4] = [[1.3, 2.0, 1.5, 1.8], [3.0, 1.5, 2.8, 2.5], [2.0, 2.2, 6.5, 4.1], [1.4, 1.6, 4.8, 5.1]];

fn study(t: [f64; 4], sizes: &[usize], reps: usize, seed: u64, exec: Exec) -> SimulationReport {
    let m = NwwModel::nww(t[0], t[1], t[2], t[3]).unwrap();
    let opts = StudyOptions { exec, ..StudyOptions::default() };
    run_study(&m, sizes, reps, seed, &opts).unwrap()
}

#[test]
fn reports_are_bit_identical_across_scheduling() {
    let a = study(SCENARIOS[0], &[50, 100], 40, 3, Exec::Sequential);
    let b = study(SCENARIOS[0], &[50, 100], 40, 3, Exec::Parallel);
    let c = study(SCENARIOS[0], &[50, 100], 40, 3, Exec::Parallel);
    assert_eq!(a, b);
    assert_eq!(b, c);
}

#[test]
fn mse_dominates_squared_bias() {
    let r = study(SCENARIOS[1], &[50], 60, 4, Exec::Parallel);
    for (b, m) in r.bias.iter().flatten().zip(r.mse.iter().flatten()) {
        assert!(*m >= b * b - 1e-12);
    }
    assert!(r.valid);
}

/// Mean absolute error and MSE shrink from n = 50 to n = 200 in at least
/// 15 of the 16 scenario × parameter cells.
#[test]
fn errors_shrink_with_sample_size() {
    let mut mae_cells = 0;
    let mut mse_cells = 0;
    for (i, t) in SCENARIOS.into_iter().enumerate() {
        let r = study(t, &[50, 200], 500, 10 + i as u64, Exec::Parallel);
        assert!(r.valid, "{t:?}: failures {:?}", r.failures);
        for j in 0..4 {
            mae_cells += usize::from(r.mean_abs_error[1][j] < r.mean_abs_error[0][j]);
            mse_cells += usize::from(r.mse[1][j] < r.mse[0][j]);
        }
    }
    assert!(mae_cells >= 15, "mae decreased in {mae_cells}/16 cells");
    assert!(mse_cells >= 15, "mse decreased in {mse_cells}/16 cells");
}
