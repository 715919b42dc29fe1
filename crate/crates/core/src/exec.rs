//! Execution policy for ensemble loops.

/// How ensemble members are scheduled. Results never depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon pool; `workers: None` uses the global pool. Falls back to
    /// sequential execution when the `parallel` feature is off.
    #[default]
    Parallel,
    ParallelWith { workers: usize },
}

impl Execution {
    pub fn with_workers(workers: Option<usize>) -> Self {
        match workers {
            Some(1) => Execution::Sequential,
            Some(workers) if workers > 1 => Execution::ParallelWith { workers },
            _ => Execution::Parallel,
        }
    }
}

/// Evaluates `f(i)` for `i in 0..n`, returned in index order.
pub(crate) fn map_indexed<T, F>(exec: Execution, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Execution::ParallelWith { workers } => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
                Err(_) => (0..n).into_par_iter().map(f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::ParallelWith { .. } => (0..n).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        for exec in [Execution::Sequential, Execution::Parallel, Execution::ParallelWith { workers: 3 }] {
            let v = map_indexed(exec, 1000, |i| i * i);
            assert!(v.iter().enumerate().all(|(i, &x)| x == (i as u64) * (i as u64)));
        }
    }
}
