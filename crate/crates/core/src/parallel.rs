//! Data-parallel execution with a sequential fallback.
//!
//! All reductions are chunked with a fixed chunk size and the chunk partials
//! are folded in index order, so results are bit-identical for any worker
//! count and for both execution modes.

use std::ops::Range;

/// Execution mode for batch loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled; sequential otherwise.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Observations per reduction chunk.
pub const CHUNK: usize = 512;

/// `f(0), …, f(n−1)` in index order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Evaluates `f` on consecutive chunks of `0..n` and folds the partials in
/// chunk order with `combine`. Errors short-circuit to the lowest failing
/// chunk.
pub fn reduce_chunks<A, E, F, C>(exec: Exec, n: usize, f: F, combine: C) -> Result<Option<A>, E>
where
    A: Send,
    E: Send,
    F: Fn(Range<usize>) -> Result<A, E> + Sync + Send,
    C: Fn(A, A) -> A,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(exec, n_chunks, |c| {
        let start = c * CHUNK;
        f(start..(start + CHUNK).min(n))
    });
    let mut acc: Option<A> = None;
    for p in partials {
        let p = p?;
        acc = Some(match acc {
            None => p,
            Some(a) => combine(a, p),
        });
    }
    Ok(acc)
}

/// Runs `f` inside a pool capped at `threads` workers (no-op without the
/// `parallel` feature or when `threads` is `None`).
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    f()
}
