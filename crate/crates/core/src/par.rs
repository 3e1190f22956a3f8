//! Data-parallel helpers.
//!
//! Every grid sweep, sample sweep and trial loop in the crate goes through
//! these functions. With the `parallel` feature (default) they dispatch to
//! rayon; without it, or inside [`with_execution`] with
//! [`Execution::Sequential`], they run as plain iterators on the calling
//! thread. Results are always collected in index order, so any reduction the
//! caller performs afterwards is deterministic.

use std::cell::Cell;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How index maps are executed on the current thread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

thread_local! {
    static MODE: Cell<Execution> = const { Cell::new(Execution::Parallel) };
}

/// Runs `f` with the given execution mode on this thread, restoring the
/// previous mode afterwards.
pub fn with_execution<R>(mode: Execution, f: impl FnOnce() -> R) -> R {
    let previous = MODE.with(|m| m.replace(mode));
    struct Restore(Execution);
    impl Drop for Restore {
        fn drop(&mut self) {
            MODE.with(|m| m.set(self.0));
        }
    }
    let _restore = Restore(previous);
    f()
}

/// The mode that will be used by the next map on this thread.
pub fn current() -> Execution {
    if cfg!(feature = "parallel") {
        MODE.with(|m| m.get())
    } else {
        Execution::Sequential
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match current() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Fallible variant of [`map_indices`]. On failure the error of the lowest
/// failing index is returned, independent of scheduling.
pub fn try_map_indices<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    match current() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            let results: Vec<Result<T, E>> = (0..n).into_par_iter().map(f).collect();
            results.into_iter().collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indices(items.len(), |i| f(&items[i]))
}

/// Fallible variant of [`map_slice`].
pub fn try_map_slice<S, T, E, F>(items: &[S], f: F) -> Result<Vec<T>, E>
where
    S: Sync,
    T: Send,
    E: Send,
    F: Fn(&S) -> Result<T, E> + Sync + Send,
{
    try_map_indices(items.len(), |i| f(&items[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let par = map_indices(1000, |i| (i as f64).sqrt());
        let seq = with_execution(Execution::Sequential, || map_indices(1000, |i| (i as f64).sqrt()));
        assert_eq!(par, seq);
        assert_eq!(current(), if cfg!(feature = "parallel") { Execution::Parallel } else { Execution::Sequential });
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<usize>, usize> =
            try_map_indices(100, |i| if i % 7 == 3 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(3));
    }

    #[test]
    fn mode_restored_after_scope() {
        with_execution(Execution::Sequential, || {
            if cfg!(feature = "parallel") {
                assert_eq!(current(), Execution::Sequential);
            }
        });
        if cfg!(feature = "parallel") {
            assert_eq!(current(), Execution::Parallel);
        }
    }
}
