//! Worker pool for independent, index-addressed tasks.
//!
//! Outputs are collected in index order, so results never depend on how many
//! workers ran them.

use rayon::prelude::*;

/// Run `n` tasks on up to `workers` threads and return outputs in task order.
///
/// `workers <= 1` runs strictly sequentially on the calling thread.
pub fn run_indexed<T, F>(workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("worker pool");
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

/// Like [`run_indexed`] for fallible tasks; the first error in task order wins.
pub fn try_run_indexed<T, F>(workers: usize, n: usize, f: F) -> crate::Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> crate::Result<T> + Sync + Send,
{
    let results = run_indexed(workers, n, f);
    let mut out = Vec::with_capacity(n);
    for r in results {
        out.push(r?);
    }
    Ok(out)
}
