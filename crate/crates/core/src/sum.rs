//! Deterministic reductions.
//!
//! Every average in this crate is computed with an index-ascending pairwise
//! summation tree. The parallel path splits the same tree at the top levels
//! with `rayon::join`, so parallel and sequential sums are bit-identical and
//! reported margins do not depend on thread count.

use num_complex::Complex64;

/// Below this length the tree bottoms out into a simple loop.
const LEAF: usize = 64;

/// Minimum span that is worth forking.
#[cfg(feature = "parallel")]
const FORK_THRESHOLD: usize = 1 << 12;

fn leaf_sum<T: Addable, F: Fn(usize) -> T>(lo: usize, hi: usize, f: &F) -> T {
    let mut acc = T::zero();
    for i in lo..hi {
        acc = acc.add(f(i));
    }
    acc
}

fn tree_sum_seq<T: Addable, F: Fn(usize) -> T>(lo: usize, hi: usize, f: &F) -> T {
    if hi - lo <= LEAF {
        return leaf_sum(lo, hi, f);
    }
    let mid = lo + (hi - lo) / 2;
    tree_sum_seq(lo, mid, f).add(tree_sum_seq(mid, hi, f))
}

#[cfg(feature = "parallel")]
fn tree_sum_par<T, F>(lo: usize, hi: usize, f: &F) -> T
where
    T: Addable + Send,
    F: Fn(usize) -> T + Sync,
{
    if hi - lo <= FORK_THRESHOLD {
        return tree_sum_seq(lo, hi, f);
    }
    let mid = lo + (hi - lo) / 2;
    let (a, b) = rayon::join(|| tree_sum_par(lo, mid, f), || tree_sum_par(mid, hi, f));
    a.add(b)
}

/// Pairwise sum of `f(0), ..., f(n-1)`, parallel when the feature is enabled.
pub fn pairwise_sum<T, F>(n: usize, f: F) -> T
where
    T: Addable + Send,
    F: Fn(usize) -> T + Sync,
{
    if n == 0 {
        return T::zero();
    }
    #[cfg(feature = "parallel")]
    {
        tree_sum_par(0, n, &f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        tree_sum_seq(0, n, &f)
    }
}

/// Single-threaded pairwise sum with the identical tree. Kept unconditionally
/// so benchmarks can compare both paths in one build.
pub fn pairwise_sum_seq<T: Addable, F: Fn(usize) -> T>(n: usize, f: F) -> T {
    if n == 0 {
        return T::zero();
    }
    tree_sum_seq(0, n, &f)
}

/// Mean over `n` terms.
pub fn pairwise_mean<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    pairwise_sum(n, f) / n as f64
}

pub trait Addable: Sized {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
}

impl Addable for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
}

impl Addable for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
}
