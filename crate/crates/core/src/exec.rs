//! Data-parallel fan-out with a sequential fallback.
//!
//! Every parallel entry point maps an index range to results collected in
//! index order, so sequential and parallel runs produce identical output.
//! Without the `parallel` feature, [`Execution::Parallel`] runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    #[default]
    Sequential,
    /// `max_threads = None` uses the global pool.
    Parallel { max_threads: Option<usize> },
}

impl Execution {
    /// Maps a thread cap to an execution mode; `0` means sequential.
    pub fn with_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(0) => Self::Sequential,
            other => Self::Parallel { max_threads: other },
        }
    }

    /// Reads `REE_THREADS` (unset: parallel on the global pool, `0`: sequential).
    pub fn from_env() -> Self {
        let cap = std::env::var("REE_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
        Self::with_threads(cap)
    }

    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && matches!(self, Self::Parallel { .. })
    }

    /// `(0..n).map(f)` collected in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Self::Sequential => (0..n).map(f).collect(),
            Self::Parallel { max_threads } => par_map(n, *max_threads, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(n: usize, max_threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let run = || (0..n).into_par_iter().map(&f).collect();
    match max_threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(n: usize, _max_threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = Execution::Sequential.map(100, |i| i * i);
        let par = Execution::Parallel { max_threads: Some(3) }.map(100, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(Execution::with_threads(Some(0)), Execution::Sequential);
    }
}
