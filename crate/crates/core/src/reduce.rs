//! Fixed-chunk reductions.
//!
//! Work is split into chunks whose boundaries depend only on the problem
//! size, each chunk is summed sequentially, and the partial sums are added
//! in chunk order. The result is therefore bit-identical for any number of
//! worker threads.

use std::ops::Range;

use rayon::prelude::*;

/// Default chunk length for pair sums.
pub const CHUNK: usize = 64;

/// Sum `f(range)` over consecutive chunks of `0..len`.
pub fn chunked_sum<F>(len: usize, chunk: usize, f: F) -> f64
where
    F: Fn(Range<usize>) -> f64 + Sync,
{
    let chunk = chunk.max(1);
    let chunks = len.div_ceil(chunk);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| f(c * chunk..((c + 1) * chunk).min(len)))
        .collect();
    partials.iter().sum()
}
