//! Execution width for data-parallel loops.
//!
//! With the `parallel` feature, [`Execution::Parallel`] runs work on a
//! dedicated rayon pool of the requested width. Without it, every variant
//! degrades to a plain sequential loop. Output order always matches input
//! order, so results never depend on the width.

use std::num::NonZeroUsize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[derive(Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel(NonZeroUsize),
}

impl Execution {
    /// `1` maps to [`Execution::Sequential`], anything larger to a pool of that width.
    pub fn with_threads(threads: usize) -> Self {
        match NonZeroUsize::new(threads) {
            Some(n) if n.get() > 1 => Execution::Parallel(n),
            _ => Execution::Sequential,
        }
    }

    pub fn threads(self) -> usize {
        match self {
            Execution::Sequential => 1,
            Execution::Parallel(n) => n.get(),
        }
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
            Execution::Parallel(n) => parallel_map(n.get(), items, f),
        }
    }
}


#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(threads: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| {
            items
                .par_iter()
                .enumerate()
                .map(|(i, t)| f(i, t))
                .collect()
        }),
        // Pool creation only fails on resource exhaustion; fall back to the caller's thread.
        Err(_) => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(_threads: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}
