/// Runs `job` on a dedicated pool of `threads` workers, or on the global pool.
/// Results never depend on the worker count: callers split work into chunks
/// fixed by the problem size and reduce them in chunk order.
pub(crate) fn with_threads<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
        None => job(),
    }
}
