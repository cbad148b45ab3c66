//! Von Neumann acceptance-rejection sampling from composed models.
//!
//! Proposals are uniform on the box [x_lo, x_hi] × [0, y_max·safety]; a
//! proposal is accepted when it falls below the density. Work is split into
//! fixed-size blocks, each with its own derived stream, so the output is
//! identical for any worker count.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::Baseline;
use crate::composed::ComposedModel;
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Exec};
use crate::rng::{derive_seed, stream, StreamRng};

/// Mass left outside [x_lo, x_hi] in each tail.
pub const TAIL_MASS: f64 = 1e-10;
pub const SAFETY: f64 = 1.05;
const GRID_POINTS: usize = 10_000;
const BLOCK: usize = 4096;
const MIN_RATE: f64 = 1e-3;
const RATE_CHECK_AFTER: u64 = 100_000;

/// Bounding box for the rejection sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub x_lo: f64,
    pub x_hi: f64,
    /// Majorant of the density on [x_lo, x_hi].
    pub y_max: f64,
    pub safety: f64,
    /// Where the refined maximum was found.
    pub argmax: f64,
}

impl Envelope {
    pub fn height(&self) -> f64 {
        self.y_max * self.safety
    }

    /// Acceptance probability implied by the box area when the enclosed mass
    /// is ~1.
    pub fn expected_acceptance(&self) -> f64 {
        1.0 / ((self.x_hi - self.x_lo) * self.height())
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Box from the 1e−10 and 1 − 1e−10 quantiles and a refined grid maximum of
/// the density.
pub fn build_envelope<B1: Baseline, B2: Baseline>(model: &ComposedModel<B1, B2>) -> Result<Envelope> {
    let x_lo = model.quantile(TAIL_MASS)?.max(model.support().lower);
    let x_hi = model.quantile(1.0 - TAIL_MASS)?;
    grid_envelope(|x| model.pdf(x), x_lo, x_hi)
}

/// Envelope of any density on [x_lo, x_hi]: maximum over a 10⁴-point grid,
/// refined by golden-section search around the best cell.
pub fn grid_envelope<F: Fn(f64) -> Result<f64>>(density: F, x_lo: f64, x_hi: f64) -> Result<Envelope> {
    if !(x_hi > x_lo) {
        return Err(Error::Envelope(format!("empty interval [{x_lo}, {x_hi}]")));
    }
    let step = (x_hi - x_lo) / (GRID_POINTS - 1) as f64;
    let mut best = (0usize, 0.0f64);
    for i in 0..GRID_POINTS {
        let x = x_lo + step * i as f64;
        let y = density(x).map_err(|e| {
            Error::Envelope(format!("{e}; choose x_lo from a quantile above the pole"))
        })?;
        if !y.is_finite() {
            return Err(Error::Envelope(format!(
                "density unbounded at x = {x}; choose x_lo from a quantile above the pole"
            )));
        }
        if y > best.1 {
            best = (i, y);
        }
    }
    let a = x_lo + step * best.0.saturating_sub(1) as f64;
    let b = (x_lo + step * (best.0 + 1) as f64).min(x_hi);
    let (xr, refined) = golden_max(|x| density(x).unwrap_or(0.0), a, b);
    let (argmax, y_max) = if refined > best.1 {
        (xr, refined)
    } else {
        (x_lo + step * best.0 as f64, best.1)
    };
    if !(y_max > 0.0 && y_max.is_finite()) {
        return Err(Error::Envelope(format!("invalid density maximum {y_max}")));
    }
    Ok(Envelope {
        x_lo,
        x_hi,
        y_max,
        safety: SAFETY,
        argmax,
    })
}

/// Draws and acceptance statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutput {
    pub values: Vec<f64>,
    pub proposals: u64,
    pub acceptance_rate: f64,
}

/// One proposal: the candidate and whether it was accepted.
pub fn propose<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    env: &Envelope,
    rng: &mut StreamRng,
) -> (f64, bool) {
    let x = rng.random_range(env.x_lo..env.x_hi);
    let u = rng.random::<f64>() * env.height();
    let y = model.pdf(x).unwrap_or(0.0);
    (x, u <= y)
}

fn sample_block<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    env: &Envelope,
    count: usize,
    seed: u64,
) -> Result<(Vec<f64>, u64)> {
    let mut rng = stream(seed);
    let mut out = Vec::with_capacity(count);
    let mut proposals = 0u64;
    while out.len() < count {
        let (x, ok) = propose(model, env, &mut rng);
        proposals += 1;
        if ok {
            out.push(x);
        }
        if proposals >= RATE_CHECK_AFTER && (out.len() as f64) < MIN_RATE * proposals as f64 {
            return Err(Error::Efficiency {
                rate: out.len() as f64 / proposals as f64,
                proposals,
            });
        }
    }
    Ok((out, proposals))
}

/// `n` i.i.d. draws using a prebuilt envelope.
pub fn sample_with_envelope<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    env: &Envelope,
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<SampleOutput> {
    if n == 0 {
        return Err(Error::Domain("sample size must be >= 1".into()));
    }
    let blocks = n.div_ceil(BLOCK);
    let parts = map_indexed(exec, blocks, |b| {
        let count = BLOCK.min(n - b * BLOCK);
        sample_block(model, env, count, derive_seed(seed, b as u64))
    });
    let mut values = Vec::with_capacity(n);
    let mut proposals = 0;
    for p in parts {
        let (v, k) = p?;
        values.extend(v);
        proposals += k;
    }
    Ok(SampleOutput {
        acceptance_rate: n as f64 / proposals as f64,
        values,
        proposals,
    })
}

/// `n` i.i.d. draws, deterministic in `seed`.
pub fn sample<B1: Baseline, B2: Baseline>(
    model: &ComposedModel<B1, B2>,
    n: usize,
    seed: u64,
) -> Result<SampleOutput> {
    let env = build_envelope(model)?;
    sample_with_envelope(model, &env, n, seed, Exec::default())
}
