//! Deterministic data-parallel helpers.
//!
//! Floating-point reductions here always use the same fixed blocking: the
//! index range is cut into blocks of `BLOCK` items, each block is summed
//! sequentially in index order, and the per-block partials are folded in
//! block order. The block layout never depends on the thread count, so the
//! rayon build (feature `parallel`) and the sequential fallback produce
//! bit-identical results, as do repeated runs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use num_complex::Complex;

pub const BLOCK: usize = 256;

fn block_ranges(n: usize) -> impl Iterator<Item = std::ops::Range<usize>> {
    (0..n.div_ceil(BLOCK)).map(move |b| (b * BLOCK)..((b + 1) * BLOCK).min(n))
}

fn fold_range<T, F>(range: std::ops::Range<usize>, zero: T, f: &F) -> T
where
    T: std::ops::Add<Output = T> + Copy,
    F: Fn(usize) -> T,
{
    let mut acc = zero;
    for i in range {
        acc = acc + f(i);
    }
    acc
}

/// Blocked sum over `0..n`, sequential execution.
pub fn sum_seq<T, F>(n: usize, zero: T, f: F) -> T
where
    T: std::ops::Add<Output = T> + Copy,
    F: Fn(usize) -> T + Sync,
{
    let mut acc = zero;
    for r in block_ranges(n) {
        acc = acc + fold_range(r, zero, &f);
    }
    acc
}

/// Blocked sum over `0..n`; runs blocks on the rayon pool when the
/// `parallel` feature is enabled. Same bits as [`sum_seq`] either way.
#[cfg(feature = "parallel")]
pub fn sum<T, F>(n: usize, zero: T, f: F) -> T
where
    T: std::ops::Add<Output = T> + Copy + Send + Sync,
    F: Fn(usize) -> T + Sync + Send,
{
    if n <= BLOCK {
        return sum_seq(n, zero, f);
    }
    let partials: Vec<T> = block_ranges(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|r| fold_range(r, zero, &f))
        .collect();
    partials.into_iter().fold(zero, |a, b| a + b)
}

#[cfg(not(feature = "parallel"))]
pub fn sum<T, F>(n: usize, zero: T, f: F) -> T
where
    T: std::ops::Add<Output = T> + Copy + Send + Sync,
    F: Fn(usize) -> T + Sync + Send,
{
    sum_seq(n, zero, f)
}

pub fn sum_f64<F: Fn(usize) -> f64 + Sync + Send>(n: usize, f: F) -> f64 {
    sum(n, 0.0, f)
}

pub fn sum_complex<F: Fn(usize) -> Complex<f64> + Sync + Send>(n: usize, f: F) -> Complex<f64> {
    sum(n, Complex::new(0.0, 0.0), f)
}

/// Order-preserving map over `0..n` into a `Vec`.
#[cfg_attr(feature = "parallel", allow(dead_code))]
pub fn map_collect_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_collect_seq(n, f)
}
