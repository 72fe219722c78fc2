use alloc::vec::Vec;

/// Runs independent indexed tasks and returns their results in index order.
///
/// Implementations may run tasks concurrently; callers reduce the returned
/// vector themselves, so the reduction order never depends on the executor.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;

    /// Number of workers, for reporting only.
    fn workers(&self) -> usize {
        1
    }
}

/// Runs every task on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
