//! Replication scheduling.
//!
//! Replications are independent: each owns its random streams and returns its
//! result by index, so the parallel and sequential paths yield identical
//! output.

use crate::error::Result;

/// Defaults to `Parallel` when the `parallel` feature is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

/// Runs `f(0..count)` and collects the results in index order. The first
/// error (by index) wins.
pub fn map_replications<T, F>(count: usize, mode: ExecMode, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..count).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
    }
}

/// Caps the global worker pool. No-op without the `parallel` feature, or if
/// the pool was already initialized.
pub fn configure_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
