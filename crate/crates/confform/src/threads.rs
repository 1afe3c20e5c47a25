//! Worker-count policy for the documented concurrent regions (atlas k-lines,
//! triple-junction component evaluations).

/// Maximum worker count: the `CONFFORM_THREADS` environment variable when set
/// to a positive integer, otherwise the available parallelism.
pub fn worker_cap() -> usize {
    match std::env::var("CONFFORM_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        Some(n) if n >= 1 => n,
        _ => std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1),
    }
}
