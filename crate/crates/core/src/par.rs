//! Data-parallel kernels with sequential fallbacks.
//!
//! With the default `parallel` feature the dispatching functions run on
//! rayon; without it they fall back to plain loops. The `_seq`/`_par`
//! variants stay public so the bench suite can compare both on the same
//! inputs. Every reduction is written so that the result is identical
//! regardless of chunking: minima carry their index and ties prefer the
//! lower index, making the combine step associative and commutative.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Lexicographic "better" for (index, value) pairs: smaller value wins,
/// ties go to the smaller index, NaN never wins.
fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if a.1.is_nan() {
        return b;
    }
    if b.1.is_nan() {
        return a;
    }
    if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

pub fn indexed_min_seq(n: usize, mut f: impl FnMut(usize) -> f64) -> (usize, f64) {
    let mut best = (0, f64::NAN);
    for i in 0..n {
        best = better(best, (i, f(i)));
    }
    best
}

#[cfg(feature = "parallel")]
pub fn indexed_min_par(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> (usize, f64) {
    (0..n)
        .into_par_iter()
        .with_min_len(256)
        .map(|i| (i, f(i)))
        .reduce(|| (0, f64::NAN), better)
}

/// Index and value of the minimum of `f` over `0..n`.
pub fn indexed_min(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> (usize, f64) {
    #[cfg(feature = "parallel")]
    {
        indexed_min_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        indexed_min_seq(n, f)
    }
}

pub fn map_indexed_seq<T: Send>(n: usize, f: impl FnMut(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_indexed_par<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().with_min_len(16).map(f).collect()
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        map_indexed_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, f)
    }
}
