//! Data-parallel helpers with a sequential fallback.
//!
//! Every kernel that loops over grid nodes or independent work units goes
//! through these functions. With the `parallel` feature (default) they
//! dispatch to rayon; without it, or when `Exec::Sequential` is requested,
//! they run on the calling thread. Reductions always combine fixed-size
//! chunks in index order so results do not depend on the thread count.

/// Execution strategy for a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Rows per work item for element-wise kernels.
pub const CHUNK: usize = 4096;

/// Calls `f(offset, chunk)` for consecutive chunks of `out`.
pub fn for_each_chunk_mut<T, F>(exec: Exec, out: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(c, s)| f(c * chunk, s));
        return;
    }
    let _ = exec;
    for (c, s) in out.chunks_mut(chunk).enumerate() {
        f(c * chunk, s);
    }
}

/// Evaluates `f(i)` for `i in 0..n`, preserving order.
pub fn map<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Deterministic chunked sum of `f(range)` over `0..n`.
pub fn sum_chunks<F>(exec: Exec, n: usize, chunk: usize, f: F) -> f64
where
    F: Fn(std::ops::Range<usize>) -> f64 + Sync + Send,
{
    let chunk = chunk.max(1);
    let parts = n.div_ceil(chunk);
    map(exec, parts, |c| f(c * chunk..((c + 1) * chunk).min(n)))
        .into_iter()
        .sum()
}

/// Worker count requested through `TFPAULI_THREADS`, if set and valid.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("TFPAULI_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Dense linear algebra splits its work into this many tasks whatever the
/// pool size, so blocked reductions round the same way on any thread count.
pub const DENSE_TASKS: usize = 4;

/// Pins the dense kernels to [`DENSE_TASKS`] (or to one thread without the
/// `parallel` feature).
pub fn pin_dense_parallelism() {
    #[cfg(feature = "parallel")]
    faer::set_global_parallelism(faer::Par::rayon(DENSE_TASKS));
    #[cfg(not(feature = "parallel"))]
    faer::set_global_parallelism(faer::Par::Seq);
}

/// Runs `f` inside a worker pool bounded by `threads` (ignored without the
/// `parallel` feature).
pub fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    pin_dense_parallelism();
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let f = |r: std::ops::Range<usize>| r.map(|i| (i as f64).sqrt()).sum::<f64>();
        let a = sum_chunks(Exec::Sequential, 100_000, 1000, f);
        let b = sum_chunks(Exec::Parallel, 100_000, 1000, f);
        assert_eq!(a.to_bits(), b.to_bits());

        let mut x = vec![0usize; 10_001];
        for_each_chunk_mut(Exec::Parallel, &mut x, 97, |off, s| {
            for (i, v) in s.iter_mut().enumerate() {
                *v = off + i;
            }
        });
        assert!(x.iter().enumerate().all(|(i, &v)| i == v));
        assert_eq!(map(Exec::Parallel, 5, |i| i * i), vec![0, 1, 4, 9, 16]);
    }
}
