//! Data-parallel execution helpers.
//!
//! Batch work (random-field audits, sweep rows, refinement ladders) goes
//! through [`map_indexed`]. With the `parallel` feature it fans out over the
//! rayon pool; without it, or with [`Execution::Sequential`], it runs on the
//! calling thread. Results always come back in index order, so downstream
//! reductions are deterministic either way.

/// How a batch should be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when the crate is built without `parallel`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Evaluate `f(0), f(1), ..., f(n-1)` and collect the results in order.
pub fn map_indexed<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Size the global worker pool. Only the first call has an effect; returns
/// false when the pool was already initialised or parallelism is compiled out.
pub fn configure_threads(jobs: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        false
    }
}
