//! Deterministic fork-join helpers.
//!
//! Work is split into fixed-size chunks and chunk results are combined in
//! chunk order, so results are bit-identical regardless of how many threads
//! actually run.

use std::thread;

const CHUNK: usize = 8192;

pub fn threads_for(jobs: usize) -> usize {
    let hw = thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    hw.min(jobs).max(1)
}

/// Sum of `f` over `xs`, chunked deterministically.
pub fn sum_by<F>(xs: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let chunks: Vec<&[f64]> = xs.chunks(CHUNK).collect();
    let n_threads = threads_for(chunks.len());
    if n_threads <= 1 {
        return chunks
            .iter()
            .map(|c| c.iter().map(|&x| f(x)).sum::<f64>())
            .sum();
    }
    let mut partials = vec![0.0_f64; chunks.len()];
    thread::scope(|scope| {
        for (t, slot_chunk) in partials
            .chunks_mut(chunks.len().div_ceil(n_threads))
            .enumerate()
        {
            let base = t * chunks.len().div_ceil(n_threads);
            let chunks = &chunks;
            let f = &f;
            scope.spawn(move || {
                for (i, slot) in slot_chunk.iter_mut().enumerate() {
                    *slot = chunks[base + i].iter().map(|&x| f(x)).sum::<f64>();
                }
            });
        }
    });
    partials.iter().sum()
}

/// Map `f` over `xs` into a new vector; element-wise, so any thread split is
/// deterministic.
pub fn map_by<F>(xs: &[f64], f: F) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut out = vec![0.0_f64; xs.len()];
    let n_threads = threads_for(xs.len().div_ceil(CHUNK).max(1));
    if n_threads <= 1 {
        for (o, &x) in out.iter_mut().zip(xs) {
            *o = f(x);
        }
        return out;
    }
    let stripe = xs.len().div_ceil(n_threads);
    thread::scope(|scope| {
        for (src, dst) in xs.chunks(stripe).zip(out.chunks_mut(stripe)) {
            let f = &f;
            scope.spawn(move || {
                for (o, &x) in dst.iter_mut().zip(src) {
                    *o = f(x);
                }
            });
        }
    });
    out
}

/// Run `f(i)` for i in 0..jobs on a bounded pool, writing into per-job slots.
pub fn for_each_job<T, F>(jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let mut out: Vec<Option<T>> = (0..jobs).map(|_| None).collect();
    let n_threads = threads_for(jobs);
    if n_threads <= 1 {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = Some(f(i));
        }
    } else {
        let per = jobs.div_ceil(n_threads);
        thread::scope(|scope| {
            for (t, slots) in out.chunks_mut(per).enumerate() {
                let f = &f;
                scope.spawn(move || {
                    for (k, slot) in slots.iter_mut().enumerate() {
                        *slot = Some(f(t * per + k));
                    }
                });
            }
        });
    }
    out.into_iter().map(|x| x.unwrap()).collect()
}
