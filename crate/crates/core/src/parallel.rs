//! Trial fan-out. With the `parallel` feature, trials run on the rayon pool;
//! otherwise they run in order on the calling thread. Results come back in
//! trial order either way.

/// Map `f` over `0..count`, in parallel when the feature is enabled.
pub fn map_trials<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_trials_sequential(count, f)
    }
}

pub fn map_trials_sequential<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

/// Whether [`map_trials`] uses worker threads.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
