//! Trajectory-level parallelism with deterministic reduction order.
//!
//! Every ensemble maps an independent per-path computation over path
//! indices and collects the results in index order, so reductions are
//! identical for any thread count. The `parallel` feature (on by default)
//! backs the map with rayon; without it the same API runs sequentially.

/// Maps `f` over `0..paths`, results in path order.
#[cfg(feature = "parallel")]
pub fn map_paths<T: Send>(paths: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..paths as u64).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..paths`, results in path order.
#[cfg(not(feature = "parallel"))]
pub fn map_paths<T: Send>(paths: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    map_paths_sequential(paths, f)
}

/// Sequential reference implementation; always available so the two lanes
/// can be compared directly.
pub fn map_paths_sequential<T: Send>(paths: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..paths as u64).map(f).collect()
}

/// Sizes the global worker pool. Call once, before any ensemble runs; later
/// calls are ignored. A no-op without the `parallel` feature.
#[cfg(feature = "parallel")]
pub fn configure_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

/// Sizes the global worker pool. Call once, before any ensemble runs; later
/// calls are ignored. A no-op without the `parallel` feature.
#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_threads: usize) {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_elementwise() {
        let f = |i: u64| {
            let x = (i as f64 + 1.0).sqrt();
            x.sin() * x
        };
        assert_eq!(map_paths(257, f), map_paths_sequential(257, f));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn results_do_not_depend_on_the_thread_count() {
        let f = |i: u64| (i as f64).cos();
        let baseline = map_paths_sequential(100, f);
        for threads in [1usize, 2, 4] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let got = pool.install(|| map_paths(100, f));
            assert_eq!(got, baseline, "threads = {threads}");
        }
    }
}
