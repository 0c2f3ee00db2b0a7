//! Worker pool for per-record and per-segment work.

use rayon::prelude::*;

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "RFPPG_WORKERS";

/// Available parallelism, capped by `RFPPG_WORKERS` when it holds a
/// positive integer.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap > 0 => cap.min(available),
        _ => available,
    }
}

/// Applies `f` to every item on the pool; results keep the input order.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let threads = worker_count();
    if threads == 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_input_order() {
        let items: Vec<u64> = (0..100).collect();
        assert_eq!(map_ordered(&items, |x| x * x), items.iter().map(|x| x * x).collect::<Vec<_>>());
    }
}
