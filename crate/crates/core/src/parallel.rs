//! Deterministic blocked reductions over quadrature nodes.
//!
//! Nodes are split into fixed-size blocks independent of the thread count.
//! Each block produces a partial result and the partials are combined by a
//! fixed pairwise tree, so results are bit-identical for any `MOPLA_THREADS`.

use std::ops::Range;
use std::sync::OnceLock;

pub const BLOCK: usize = 64;

/// Worker count from `MOPLA_THREADS` (default 1).
pub fn thread_count() -> usize {
    static THREADS: OnceLock<usize> = OnceLock::new();
    *THREADS.get_or_init(|| {
        std::env::var("MOPLA_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .unwrap_or(1)
    })
}

pub fn reduce_blocks<T, M, C>(len: usize, threads: usize, map: M, combine: C) -> Option<T>
where
    T: Send,
    M: Fn(Range<usize>) -> T + Sync,
    C: Fn(T, T) -> T,
{
    let blocks: Vec<Range<usize>> = (0..len.div_ceil(BLOCK))
        .map(|b| b * BLOCK..((b + 1) * BLOCK).min(len))
        .collect();
    let partials: Vec<T> = if threads <= 1 || blocks.len() <= 1 {
        blocks.into_iter().map(&map).collect()
    } else {
        let workers = threads.min(blocks.len());
        let mut slots: Vec<Option<T>> = (0..blocks.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let map = &map;
                    let blocks = &blocks;
                    scope.spawn(move || {
                        blocks
                            .iter()
                            .enumerate()
                            .skip(w)
                            .step_by(workers)
                            .map(|(i, r)| (i, map(r.clone())))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, v) in h.join().expect("assembly worker panicked") {
                    slots[i] = Some(v);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("block computed")).collect()
    };
    pairwise(partials, &combine)
}

fn pairwise<T, C: Fn(T, T) -> T>(mut items: Vec<T>, combine: &C) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_bits() {
        let data: Vec<f64> = (0..1000).map(|i| ((i as f64) * 0.7).sin() * 1e-3 + 1.0 / (i as f64 + 1.0)).collect();
        let sum = |threads| {
            reduce_blocks(data.len(), threads, |r| data[r].iter().sum::<f64>(), |a, b| a + b).unwrap()
        };
        let one = sum(1);
        for threads in 2..6 {
            assert_eq!(one.to_bits(), sum(threads).to_bits());
        }
    }

    #[test]
    fn empty_input() {
        assert!(reduce_blocks(0, 2, |_| 1.0, |a: f64, b| a + b).is_none());
    }
}
