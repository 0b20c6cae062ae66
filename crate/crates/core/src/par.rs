//! Data-parallel helpers. With the `parallel` feature the work is spread
//! over the rayon pool; without it everything runs in order on the caller's
//! thread. Results are always returned in index order.

/// `(0..n).map(f)` collected in order, possibly in parallel.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential twin of [`map_indexed`], available regardless of features.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Whether this build spreads work across threads.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Caps the worker count of the global pool. Without the `parallel`
/// feature this only validates the argument. Fails if the pool is
/// already running with a different size.
pub fn configure_jobs(jobs: usize) -> crate::error::Result<()> {
    if jobs == 0 {
        return Err(crate::error::Error::InvalidArgument("--jobs must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| crate::error::Error::InvalidArgument(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}
