//! Realization-level parallelism.
//!
//! With the `parallel` feature (default) work items run on a rayon pool;
//! without it, or with [`Execution::Sequential`], they run in index order on
//! the calling thread. Results are always returned in index order, so both
//! paths produce identical output.

use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool.
    #[default]
    Parallel,
    /// A dedicated pool with this many threads.
    Workers(usize),
}

impl Execution {
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            Some(1) => Execution::Sequential,
            Some(n) => Execution::Workers(n),
            None => Execution::Parallel,
        }
    }
}

/// Evaluates `f(0..n)`, returning one result per index in order.
pub fn map_indexed<T, F>(n: usize, execution: Execution, f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match execution {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => parallel_map(n, &f),
        #[cfg(feature = "parallel")]
        Execution::Workers(w) => match rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
            Ok(pool) => pool.install(|| parallel_map(n, &f)),
            Err(_) => parallel_map(n, &f),
        },
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel | Execution::Workers(_) => (0..n).map(f).collect(),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, f: &F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Number of threads work will actually use.
pub fn effective_workers(execution: Execution) -> usize {
    match execution {
        Execution::Sequential => 1,
        #[cfg(feature = "parallel")]
        Execution::Parallel => rayon::current_num_threads(),
        #[cfg(feature = "parallel")]
        Execution::Workers(w) => w.max(1),
        #[cfg(not(feature = "parallel"))]
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn all_modes_agree_and_keep_order() {
        let f = |i: usize| -> Result<u64> {
            if i == 7 {
                Err(Error::InvalidArgument("seven".into()))
            } else {
                Ok((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
            }
        };
        let seq = map_indexed(20, Execution::Sequential, f);
        for exec in [Execution::Parallel, Execution::Workers(3)] {
            let par = map_indexed(20, exec, f);
            assert_eq!(par.len(), 20);
            for (a, b) in seq.iter().zip(&par) {
                match (a, b) {
                    (Ok(x), Ok(y)) => assert_eq!(x, y),
                    (Err(_), Err(_)) => {}
                    _ => panic!("mismatch"),
                }
            }
        }
        assert!(seq[7].is_err());
    }

    #[test]
    fn worker_mapping() {
        assert_eq!(Execution::from_workers(Some(1)), Execution::Sequential);
        assert_eq!(Execution::from_workers(Some(4)), Execution::Workers(4));
        assert_eq!(Execution::from_workers(None), Execution::Parallel);
        assert_eq!(effective_workers(Execution::Sequential), 1);
    }
}
