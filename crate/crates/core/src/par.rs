//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these dispatch to rayon once the
//! workload crosses [`PARALLEL_THRESHOLD`]; without it they are plain loops.
//! Every helper writes each output element with the same sequence of floating
//! point operations regardless of the path taken, so results are bit-identical
//! between the two builds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum number of elements before work is split across threads.
pub const PARALLEL_THRESHOLD: usize = 4096;

/// Whether this build dispatches to rayon at all.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Map `f` over `0..n`, collecting in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Map `f` over a slice of independent work items (experiment cells, rows).
pub fn map_items<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Apply `f(offset, chunk)` to consecutive mutable chunks of `out`.
///
/// `offset` is the index of the chunk's first element in `out`.
pub fn for_each_chunk_mut<T, F>(out: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        if out.len() >= PARALLEL_THRESHOLD {
            out.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(c, s)| f(c * chunk, s));
            return;
        }
    }
    for (c, s) in out.chunks_mut(chunk).enumerate() {
        f(c * chunk, s);
    }
}

/// Run `f` inside a pool of `jobs` threads (0 = rayon default).
///
/// Without the `parallel` feature this simply calls `f`.
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if jobs > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        f()
    }
}
