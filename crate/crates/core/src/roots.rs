//! Bracketed monotone root finding (bisection safeguarded Newton).

use crate::error::{Error, Result};

const MAX_EXPAND: usize = 2000;
const MAX_ITER: usize = 400;

/// Finds `x` with `resid(x) = 0` for a nondecreasing `resid` on
/// `[lo_bound, hi_bound]`.
///
/// Infinite bounds are replaced by an expanding search around `start`.
/// `slope` is the derivative of `resid`, used for Newton steps when it keeps
/// the iterate inside the current bracket. Iteration stops once the bracket
/// is narrower than `xtol · max(1, |x|)`.
pub fn solve_increasing<R, S>(
    resid: R,
    slope: S,
    lo_bound: f64,
    hi_bound: f64,
    start: f64,
    xtol: f64,
) -> Result<f64>
where
    R: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    let mut lo = if lo_bound.is_finite() {
        lo_bound
    } else {
        let mut step = 1.0_f64.max(start.abs());
        let mut x = start - step;
        let mut n = 0;
        while resid(x) > 0.0 {
            step *= 2.0;
            x = start - step;
            n += 1;
            if n > MAX_EXPAND || !x.is_finite() {
                return Err(Error::Domain("unable to bracket root from below".into()));
            }
        }
        x
    };
    let mut hi = if hi_bound.is_finite() {
        hi_bound
    } else {
        let base = start.max(lo);
        let mut step = 1.0_f64.max(base.abs());
        let mut x = base + step;
        let mut n = 0;
        while resid(x) < 0.0 {
            step *= 2.0;
            x = base + step;
            n += 1;
            if n > MAX_EXPAND || !x.is_finite() {
                return Err(Error::Domain("unable to bracket root from above".into()));
            }
        }
        x
    };

    let f_lo = resid(lo);
    if f_lo >= 0.0 {
        return Ok(lo);
    }
    let f_hi = resid(hi);
    if f_hi <= 0.0 {
        return Ok(hi);
    }

    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..MAX_ITER {
        let fx = resid(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= xtol * x.abs().max(1.0) {
            return Ok(0.5 * (lo + hi));
        }
        let d = slope(x);
        let newton = if d > 0.0 && d.is_finite() {
            x - fx / d
        } else {
            f64::NAN
        };
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(x)
}
