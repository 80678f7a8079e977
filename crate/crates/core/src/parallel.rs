//! Worker pool shared by the numerical kernels.
//!
//! `NONLOCAL_LAB_THREADS` caps the number of workers; 0 or unset means one
//! worker per available core. Reductions never depend on the pool size.

use std::sync::OnceLock;

use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable read once, on first use of the pool.
pub const THREADS_ENV: &str = "NONLOCAL_LAB_THREADS";

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
        ThreadPoolBuilder::new().num_threads(n).build().expect("failed to start worker pool")
    })
}

/// Runs `f` inside the shared pool.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}
