//! Execution strategy for the data-parallel loops (surveys, brute-force
//! scans, box counts).
//!
//! With the `parallel` feature enabled, [`Exec::Parallel`] runs on rayon;
//! without it every strategy runs sequentially. Results are identical either
//! way: parallel maps preserve input order and reductions are over integers.

/// How to run a data-parallel loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Order-preserving map.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Order-preserving map over an integer range.
    pub fn map_range<U, F>(self, range: std::ops::RangeInclusive<i64>, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(i64) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().map(f).collect()
            }
            _ => range.map(f).collect(),
        }
    }

    /// Sum of `f` over an integer range.
    pub fn sum_range<F>(self, range: std::ops::RangeInclusive<i64>, f: F) -> u64
    where
        F: Fn(i64) -> u64 + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().map(f).sum()
            }
            _ => range.map(f).sum(),
        }
    }
}

/// Runs `f` inside a rayon pool with `jobs` threads. Without the `parallel`
/// feature, or with `jobs == 0`, `f` runs on the caller's thread pool as is.
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if jobs > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(f);
            }
        }
    }
    let _ = jobs;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let items: Vec<i64> = (0..1000).collect();
        let a = Exec::Sequential.map(&items, |x| x * x);
        let b = Exec::Parallel.map(&items, |x| x * x);
        assert_eq!(a, b);
        let s1 = Exec::Sequential.sum_range(-50..=50, |x| x.unsigned_abs());
        let s2 = Exec::Parallel.sum_range(-50..=50, |x| x.unsigned_abs());
        assert_eq!(s1, s2);
        assert_eq!(s1, 2550);
    }
}
