//! Data-parallel execution of independent work items.
//!
//! Every Monte Carlo loop in the crate (trials, per-source traffic synthesis, Brandes sources)
//! is expressed as "compute item `i` for `i in 0..n`, then combine in index order". The combine
//! step always runs in index order, so a parallel run and a sequential run produce bit-identical
//! results.

use serde::{Deserialize, Serialize};

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    /// Plain iterator on the calling thread.
    Sequential,
    /// rayon's global pool. Falls back to [`Execution::Sequential`] without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    /// True if this build can actually run work in parallel.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Like [`Execution::map`] for fallible items; the error of the lowest failing index wins.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }

    /// Splits `0..n` into fixed-size chunks, folds each chunk with `fold` starting from `init()`,
    /// and merges the chunk accumulators left to right with `merge`.
    ///
    /// Chunk boundaries depend only on `n` and `chunk`, never on the thread count, which keeps
    /// floating-point reductions reproducible.
    pub fn chunked_fold<A, I, F, M>(self, n: usize, chunk: usize, init: I, fold: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut A, usize) + Sync + Send,
        M: Fn(&mut A, A),
    {
        let chunk = chunk.max(1);
        let chunks = n.div_ceil(chunk);
        let partials = self.map(chunks, |c| {
            let mut acc = init();
            for i in c * chunk..((c + 1) * chunk).min(n) {
                fold(&mut acc, i);
            }
            acc
        });
        let mut out = init();
        for p in partials {
            merge(&mut out, p);
        }
        out
    }
}
