//! Execution strategy for the Monte Carlo inner loops.
//!
//! Work is split into fixed batches of indices; each batch is reduced
//! sequentially in index order and batch results are combined in batch order.
//! The result is therefore bit-identical whether batches run on one thread or
//! many, and with the `parallel` feature disabled entirely.

/// How trial loops execute. `Parallel` uses rayon when the `parallel` feature
/// is enabled and silently degrades to sequential otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Parallel,
    Sequential,
}

const BATCH: u64 = 1024;

/// Maps every index in `0..n` and folds the results. The fold order is fixed
/// by index regardless of `mode`, so floating-point accumulations stay
/// deterministic across thread counts.
pub(crate) fn batched_map_fold<A, M, F, Z>(n: u64, mode: ExecMode, zero: Z, map: M, fold: F) -> A
where
    A: Send,
    M: Fn(u64) -> A + Sync,
    F: Fn(A, A) -> A + Sync,
    Z: Fn() -> A + Sync,
{
    let batches = n.div_ceil(BATCH);
    let run_batch = |b: u64| {
        let start = b * BATCH;
        let end = (start + BATCH).min(n);
        (start..end).map(&map).fold(zero(), &fold)
    };
    match mode {
        ExecMode::Sequential => (0..batches).map(run_batch).fold(zero(), &fold),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                let parts: Vec<A> = (0..batches).into_par_iter().map(run_batch).collect();
                parts.into_iter().fold(zero(), &fold)
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..batches).map(run_batch).fold(zero(), &fold)
            }
        }
    }
}

/// Maps a slice in order, in parallel when available. Output order matches
/// input order.
pub(crate) fn indexed_map<T, A, M>(items: &[T], mode: ExecMode, map: M) -> Vec<A>
where
    T: Sync,
    A: Send,
    M: Fn(&T) -> A + Sync,
{
    match mode {
        ExecMode::Sequential => items.iter().map(map).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                items.par_iter().map(map).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                items.iter().map(map).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_fold_identical_across_modes() {
        let map = |i: u64| 1.0 / (i as f64 + 1.0);
        let seq = batched_map_fold(50_000, ExecMode::Sequential, || 0.0, map, |a, b| a + b);
        let par = batched_map_fold(50_000, ExecMode::Parallel, || 0.0, map, |a, b| a + b);
        assert_eq!(seq.to_bits(), par.to_bits());
    }
}
