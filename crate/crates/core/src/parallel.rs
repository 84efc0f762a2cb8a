//! Sharded evaluation of per-start tasks.
//!
//! Workers receive disjoint contiguous index ranges and write results
//! into disjoint slices; every per-index computation draws randomness
//! only from its own counter-based stream, so the assembled output is
//! identical for any worker count.

/// Evaluate `f(index)` for `0..total`, sharded over `workers` threads.
pub fn run_sharded<T, F>(total: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(total.max(1));
    let mut out = vec![T::default(); total];
    if total == 0 {
        return out;
    }
    let chunk = total.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slice) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                let base = w * chunk;
                for (i, slot) in slice.iter_mut().enumerate() {
                    *slot = f(base + i);
                }
            });
        }
    });
    out
}

/// Fold `f(index)` into per-worker accumulators and merge them in worker
/// order. Exact for associative merges (counters); floating merges stay
/// deterministic because chunk boundaries depend only on `(total,
/// workers)` and results are reduced in a fixed order.
pub fn run_sharded_fold<A, F, M>(total: usize, workers: usize, init: A, f: F, merge: M) -> A
where
    A: Send + Clone,
    F: Fn(&mut A, usize) + Sync,
    M: Fn(A, A) -> A,
{
    let workers = workers.max(1).min(total.max(1));
    if total == 0 {
        return init;
    }
    let chunk = total.div_ceil(workers);
    let mut parts: Vec<A> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers.min(total.div_ceil(chunk)) {
            let f = &f;
            let mut acc = init.clone();
            handles.push(scope.spawn(move || {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(total);
                for i in lo..hi {
                    f(&mut acc, i);
                }
                acc
            }));
        }
        for h in handles {
            parts.push(h.join().expect("worker panicked"));
        }
    });
    parts.into_iter().fold(init, merge)
}
