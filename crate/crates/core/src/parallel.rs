use crate::error::{Error, Result};

/// Runs `f` on a dedicated rayon pool with `workers` threads; 0 picks the
/// number of available cores.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(f)
}
