//! Thread-capped parallel mapping with deterministic result order.

use std::thread;

/// Maps `f` over `items` using at most `jobs` worker threads. Results come
/// back in input order, so output is identical to a sequential map.
pub fn map_limit<T, R, F>(items: Vec<T>, jobs: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let n = items.len();
    if jobs <= 1 || n <= 1 {
        return items.into_iter().map(f).collect();
    }
    let workers = jobs.min(n);
    let chunk = n.div_ceil(workers);
    // Contiguous index-tagged buckets, one per worker.
    let mut buckets: Vec<Vec<(usize, T)>> = Vec::with_capacity(workers);
    for (i, item) in items.into_iter().enumerate() {
        if i % chunk == 0 {
            buckets.push(Vec::with_capacity(chunk));
        }
        buckets.last_mut().expect("bucket exists").push((i, item));
    }
    let f = &f;
    let mut indexed: Vec<(usize, R)> = thread::scope(|scope| {
        let handles: Vec<_> = buckets
            .into_iter()
            .map(|bucket| {
                scope.spawn(move || {
                    bucket
                        .into_iter()
                        .map(|(i, item)| (i, f(item)))
                        .collect::<Vec<(usize, R)>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    indexed.sort_by_key(|(i, _)| *i);
    indexed.into_iter().map(|(_, r)| r).collect()
}
