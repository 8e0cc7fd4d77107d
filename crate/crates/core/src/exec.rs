//! Execution strategy for per-variant and per-cell work.
//!
//! With the `parallel` feature the map runs on rayon; without it every
//! strategy runs sequentially. Results always come back in input order.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            Exec::Parallel => par_map(items, f),
        }
    }

    /// True when this build can actually run work in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Runs `f` on a pool with `jobs` threads; `None` uses the global pool.
#[cfg(feature = "parallel")]
pub fn with_thread_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match jobs {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// Runs `f` directly; this build has no thread pool.
#[cfg(not(feature = "parallel"))]
pub fn with_thread_pool<R: Send>(_jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_and_keep_order() {
        let items: Vec<u32> = (0..1000).collect();
        let seq = Exec::Sequential.map(&items, |x| x * 3);
        let par = with_thread_pool(Some(4), || Exec::Parallel.map(&items, |x| x * 3));
        assert_eq!(seq, par);
        assert_eq!(seq[999], 2997);
    }
}
