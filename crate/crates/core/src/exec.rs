//! Sequential or data-parallel evaluation of independent work items.
//!
//! Both paths produce results in index order, so any reduction performed on
//! the returned vector is identical regardless of the mode or thread count.
//! Without the `parallel` feature, [`ExecutionMode::Parallel`] runs
//! sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecutionMode {
    /// True when work is actually spread across threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecutionMode::Parallel
    }
}

/// Evaluates `f(0), f(1), …, f(n-1)` and returns the results in order.
pub fn map_indexed<T, F>(mode: ExecutionMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode == ExecutionMode::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}
