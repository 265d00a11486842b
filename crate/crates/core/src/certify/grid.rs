//! Index-parallel evaluation of independent grid points.
//!
//! Certification evaluates μ at many independent points; the work is
//! data-parallel and the reduction (a max) is order-independent, so running
//! it on a thread pool cannot change results. Every element is evaluated to
//! its own `Result` (no short-circuit), keeping error selection
//! deterministic: callers scan in index order.

use crate::error::Result;

/// Sequential evaluation, always available.
pub fn map_seq<T: Send>(
    count: usize,
    eval: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Vec<Result<T>> {
    (0..count).map(eval).collect()
}

/// Parallel evaluation on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_par<T: Send>(
    count: usize,
    eval: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Vec<Result<T>> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(eval).collect()
}

/// Dispatch to the parallel path when the `parallel` feature is enabled.
pub fn map<T: Send>(
    count: usize,
    eval: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Vec<Result<T>> {
    #[cfg(feature = "parallel")]
    {
        map_par(count, eval)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(count, eval)
    }
}
