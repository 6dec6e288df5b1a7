//! Replication executor.
//!
//! With the `parallel` feature, replications run on a rayon pool whose width
//! honours `FCLT_THREADS`. Results are always collected in replication order
//! and reduced sequentially, so every estimate is independent of the worker
//! count and of scheduling.

/// Worker cap from `FCLT_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("FCLT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    use std::sync::OnceLock;
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_cap() {
            b = b.num_threads(n);
        }
        b.build().expect("failed to build worker pool")
    })
}

/// Execution mode for replication loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

/// Evaluates `f(0..reps)` and returns the results in index order.
pub fn map_reps<T, F>(reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_reps_with(Mode::default(), reps, f)
}

/// [`map_reps`] with an explicit execution mode.
pub fn map_reps_with<T, F>(mode: Mode, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        Mode::Sequential => (0..reps).map(f).collect(),
        #[cfg(feature = "parallel")]
        Mode::Parallel => {
            use rayon::prelude::*;
            pool().install(|| (0..reps).into_par_iter().map(f).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = map_reps(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        let s = map_reps_with(Mode::Sequential, 1000, |i| i * i);
        assert_eq!(v, s);
    }
}
