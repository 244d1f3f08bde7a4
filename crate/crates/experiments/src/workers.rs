use std::sync::OnceLock;

use rayon::prelude::*;

/// Worker threads for seed fan-out: `PCO_WORKERS` if set, else all cores.
pub fn worker_count() -> usize {
    std::env::var("PCO_WORKERS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build().expect("thread pool"))
}

/// Maps `f` over `items` in parallel; results keep the input order.
pub(crate) fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    pool().install(|| items.into_par_iter().map(f).collect())
}
