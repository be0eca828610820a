//! Parallel drivers over independent paths and sources.
//!
//! Work is split by index and collected in index order, so results do not
//! depend on the number of workers.

use rayon::prelude::*;
use rayon::ThreadPool;
use tilewalk_core::{sample_path, ColumnGreen, RootGreen, TransitionKernel, Word};

pub fn pool(workers: Option<usize>) -> ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    builder.build().expect("thread pool")
}

/// Final words `Z_{n_steps}` of paths `0..n_paths`.
pub fn final_words<K>(pool: &ThreadPool, kernel: &K, n_paths: u64, n_steps: u32, seed: u64) -> tilewalk_core::Result<Vec<Word>>
where
    K: TransitionKernel + Sync,
{
    pool.install(|| {
        (0..n_paths)
            .into_par_iter()
            .map(|i| sample_path(kernel, seed, i, n_steps).map(|p| p.last()))
            .collect()
    })
}

/// `−log F(o, w)` for every `w`, each from its own backward column.
pub fn green_logs<K>(pool: &ThreadPool, kernel: &K, words: &[Word]) -> tilewalk_core::Result<Vec<f64>>
where
    K: TransitionKernel + Sync,
{
    let green = ColumnGreen::new(kernel);
    pool.install(|| words.par_iter().map(|w| green.g(w)).collect())
}

/// Runs `job` on every item in parallel, keeping the input order.
pub fn map_ordered<T, R, F>(pool: &ThreadPool, items: &[T], job: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    pool.install(|| items.par_iter().map(job).collect())
}
