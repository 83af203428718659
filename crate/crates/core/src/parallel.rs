//! Deterministic chunked reductions over slices.
//!
//! Work is split into fixed-size chunks; each chunk is reduced sequentially
//! and the per-chunk partials are combined in chunk order. With the
//! `parallel` feature the chunks run on rayon, otherwise in a plain loop.
//! The floating-point result is the same either way.

use std::cell::Cell;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of items reduced sequentially inside one chunk.
pub const CHUNK_LEN: usize = 1024;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Run `f` with all reductions on the current thread forced sequential.
pub fn with_sequential<R>(f: impl FnOnce() -> R) -> R {
    struct Reset(bool);
    impl Drop for Reset {
        fn drop(&mut self) {
            FORCE_SEQUENTIAL.with(|c| c.set(self.0));
        }
    }
    let _reset = Reset(FORCE_SEQUENTIAL.with(|c| c.replace(true)));
    f()
}

/// Whether reductions issued from this thread will use the thread pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

fn chunk_partials<T, R, F>(items: &[T], reduce_chunk: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &[T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return items
            .par_chunks(CHUNK_LEN)
            .enumerate()
            .map(|(c, chunk)| reduce_chunk(c * CHUNK_LEN, chunk))
            .collect();
    }
    items
        .chunks(CHUNK_LEN)
        .enumerate()
        .map(|(c, chunk)| reduce_chunk(c * CHUNK_LEN, chunk))
        .collect()
}

/// Element-wise map preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    chunk_partials(items, |_, chunk| chunk.iter().map(&f).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

/// Sum of `N` simultaneous accumulators, e.g. numerator and denominator of
/// a ratio of integrals.
pub fn try_sum_n<const N: usize, T, E, F>(items: &[T], f: F) -> Result<[f64; N], E>
where
    T: Sync,
    E: Send,
    F: Fn(&T) -> Result<[f64; N], E> + Sync + Send,
{
    let partials = chunk_partials(items, |_, chunk| {
        let mut acc = [0.0; N];
        for item in chunk {
            let v = f(item)?;
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        Ok(acc)
    });
    let mut total = [0.0; N];
    for p in partials {
        for (a, x) in total.iter_mut().zip(p?) {
            *a += x;
        }
    }
    Ok(total)
}

pub fn try_sum<T, E, F>(items: &[T], f: F) -> Result<f64, E>
where
    T: Sync,
    E: Send,
    F: Fn(&T) -> Result<f64, E> + Sync + Send,
{
    try_sum_n::<1, _, _, _>(items, |x| f(x).map(|v| [v])).map(|[v]| v)
}

pub fn sum<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    try_sum::<_, std::convert::Infallible, _>(items, |x| Ok(f(x))).unwrap_or_else(|e| match e {})
}

/// Minimum and maximum of a scalar function over a slice, with indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub argmin: usize,
    pub max: f64,
    pub argmax: usize,
}

impl Extrema {
    fn merge(self, other: Extrema) -> Extrema {
        // strict comparisons keep the lower index on ties
        let (min, argmin) = if other.min < self.min {
            (other.min, other.argmin)
        } else {
            (self.min, self.argmin)
        };
        let (max, argmax) = if other.max > self.max {
            (other.max, other.argmax)
        } else {
            (self.max, self.argmax)
        };
        Extrema {
            min,
            argmin,
            max,
            argmax,
        }
    }
}

/// Extrema of `f` over `items`, skipping NaN values. `None` when every value
/// is NaN or the slice is empty. Ties resolve to the lowest index.
pub fn extrema<T, F>(items: &[T], f: F) -> Option<Extrema>
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    chunk_partials(items, |offset, chunk| {
        let mut best: Option<Extrema> = None;
        for (i, item) in chunk.iter().enumerate() {
            let v = f(item);
            if v.is_nan() {
                continue;
            }
            let e = Extrema {
                min: v,
                argmin: offset + i,
                max: v,
                argmax: offset + i,
            };
            best = Some(match best {
                Some(b) => b.merge(e),
                None => e,
            });
        }
        best
    })
    .into_iter()
    .flatten()
    .reduce(Extrema::merge)
}
