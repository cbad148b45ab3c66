//! Box-constrained limited-memory BFGS.
//!
//! Each iteration fixes the variables that sit on a bound with the gradient
//! pointing outward, builds a two-loop L-BFGS direction on the remaining
//! free variables, and backtracks along the projected path
//! x(α) = P(x + α·d) until the Armijo condition holds. Accepted iterates
//! therefore never increase the objective.

use crate::params::project;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    /// Memory depth of the quasi-Newton history.
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when the projected-gradient ∞-norm falls below this.
    pub pg_tol: f64,
    /// Stop when |Δf| ≤ f_tol · max(|f|, 1).
    pub f_tol: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iter: 500,
            pg_tol: 1e-6,
            f_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ProjectedGradient,
    FunctionChange,
    MaxIterations,
    LineSearchFailed,
    NonFiniteStart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub projected_grad_norm: f64,
    pub iterations: usize,
    pub reason: StopReason,
    /// Objective value after each accepted iteration, starting point first.
    pub history: Vec<f64>,
}

impl OptimizerResult {
    pub fn converged(&self) -> bool {
        matches!(self.reason, StopReason::ProjectedGradient | StopReason::FunctionChange)
    }
}

/// ∞-norm of the gradient with outward-pointing components on active
/// bounds removed.
pub fn projected_gradient_norm(x: &[f64], g: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((&xi, &gi), (&lo, &hi))| {
            if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) {
                0.0
            } else {
                gi.abs()
            }
        })
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `objective` over the box `[lower, upper]` from `x0`.
///
/// `objective` returns `(f, ∇f)` or `None` when the point cannot be
/// evaluated; such points are rejected by the line search.
pub fn minimize_box<F>(
    mut objective: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &OptimizerOptions,
) -> OptimizerResult
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let Some((mut f, mut g)) = objective(&x).filter(|(f, g)| f.is_finite() && g.iter().all(|v| v.is_finite()))
    else {
        return OptimizerResult {
            projected_grad_norm: f64::INFINITY,
            x,
            f: f64::INFINITY,
            grad: vec![f64::NAN; n],
            iterations: 0,
            reason: StopReason::NonFiniteStart,
            history: vec![],
        };
    };
    let mut history = vec![f];
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut iterations = 0;
    let mut reason = StopReason::MaxIterations;

    while iterations < opts.max_iter {
        let pg = projected_gradient_norm(&x, &g, lower, upper);
        if pg <= opts.pg_tol {
            reason = StopReason::ProjectedGradient;
            break;
        }
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)))
            .collect();
        let mask = |v: &[f64]| -> Vec<f64> { v.iter().zip(&free).map(|(&a, &f)| if f { a } else { 0.0 }).collect() };

        // two-loop recursion on the free subspace
        let mut q = mask(&g);
        let m = s_hist.len();
        let mut alpha = vec![0.0; m];
        let mut rho = vec![0.0; m];
        for i in (0..m).rev() {
            let s = mask(&s_hist[i]);
            let y = mask(&y_hist[i]);
            let sy = dot(&s, &y);
            rho[i] = if sy > 0.0 { 1.0 / sy } else { 0.0 };
            alpha[i] = rho[i] * dot(&s, &q);
            for j in 0..n {
                q[j] -= alpha[i] * y[j];
            }
        }
        let gamma = if m > 0 {
            let s = mask(&s_hist[m - 1]);
            let y = mask(&y_hist[m - 1]);
            let yy = dot(&y, &y);
            if yy > 0.0 && dot(&s, &y) > 0.0 {
                dot(&s, &y) / yy
            } else {
                1.0
            }
        } else {
            1.0 / mask(&g).iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0)
        };
        for v in q.iter_mut() {
            *v *= gamma;
        }
        for i in 0..m {
            let s = mask(&s_hist[i]);
            let y = mask(&y_hist[i]);
            let beta = rho[i] * dot(&y, &q);
            for j in 0..n {
                q[j] += s[j] * (alpha[i] - beta);
            }
        }
        let mut d: Vec<f64> = mask(&q).iter().map(|v| -v).collect();
        if dot(&d, &g) >= 0.0 {
            // not a descent direction: drop the history and use steepest descent
            s_hist.clear();
            y_hist.clear();
            let scale = 1.0 / pg.max(1.0);
            d = mask(&g).iter().map(|v| -v * scale).collect();
        }

        // projected backtracking line search
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            project(&mut trial, lower, upper);
            let moved: Vec<f64> = trial.iter().zip(&x).map(|(t, xi)| t - xi).collect();
            let decrease = dot(&g, &moved);
            if moved.iter().all(|v| *v == 0.0) {
                break;
            }
            if let Some((ft, gt)) = objective(&trial) {
                if ft.is_finite() && gt.iter().all(|v| v.is_finite()) && ft <= f + 1e-4 * decrease {
                    accepted = Some((trial, ft, gt, moved));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new, s)) = accepted else {
            reason = StopReason::LineSearchFailed;
            break;
        };
        iterations += 1;
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-12 * dot(&y, &y) {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        let f_old = f;
        x = x_new;
        f = f_new;
        g = g_new;
        history.push(f);
        if (f_old - f).abs() <= opts.f_tol * f.abs().max(1.0) {
            reason = StopReason::FunctionChange;
            break;
        }
    }
    OptimizerResult {
        projected_grad_norm: projected_gradient_norm(&x, &g, lower, upper),
        x,
        f,
        grad: g,
        iterations,
        reason,
        history,
    }
}
