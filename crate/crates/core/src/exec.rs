//! Data-parallel execution helpers.
//!
//! Every parallel loop in the crate is an indexed map whose output order is
//! the index order, so results are identical for any worker count. With the
//! `parallel` feature disabled, [`Execution::Parallel`] runs sequentially.

/// How an indexed workload is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `true` when this build can actually run work on several threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(i)` for `i` in `start..end`, returning results in index order.
pub fn map_range<T, F>(start: u64, end: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (start..end).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (start..end).map(f).collect()
}

/// Evaluates `f` over a slice, returning results in slice order.
pub fn map_slice<A, T, F>(items: &[A], exec: Execution, f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Folds `items` into per-worker accumulators and merges them. `merge` must
/// be associative and commutative for the result to be independent of the
/// worker count.
pub fn fold_slice<A, Acc, Id, Fo, Me>(items: &[A], exec: Execution, identity: Id, fold: Fo, merge: Me) -> Acc
where
    A: Sync,
    Acc: Send,
    Id: Fn() -> Acc + Sync + Send,
    Fo: Fn(Acc, &A) -> Acc + Sync + Send,
    Me: Fn(Acc, Acc) -> Acc + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().fold(&identity, &fold).reduce(&identity, &merge);
    }
    let _ = (exec, &merge);
    items.iter().fold(identity(), fold)
}
