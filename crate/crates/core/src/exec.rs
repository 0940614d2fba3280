//! Execution helpers shared by the data-parallel kernels.
//!
//! All parallelism in the crate goes through `map_indexed`: an indexed
//! map whose results are collected in index order, so the output (and
//! any ordered reduction of it) is bitwise independent of the worker
//! count. `map_indexed_seq` is the single-threaded reference path and is
//! what `map_indexed` lowers to without the `parallel` feature.

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential reference implementation of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Pairwise summation: deterministic and with O(log n) error growth.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        acc
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Parallel map over `0..n` followed by an ordered pairwise reduction.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    pairwise_sum(&map_indexed(n, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_sequential() {
        let values: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let seq: f64 = values.iter().sum();
        assert!((pairwise_sum(&values) - seq).abs() < 1e-12);
    }

    #[test]
    fn map_indexed_preserves_order() {
        let out = map_indexed(100, |i| i * 2);
        assert_eq!(out, (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }

    #[test]
    fn parallel_and_sequential_sums_are_bitwise_equal() {
        let f = |i: usize| ((i as f64) * 0.1).cos() / (i as f64 + 1.0);
        let par = sum_indexed(4096, f);
        let seq = pairwise_sum(&map_indexed_seq(4096, f));
        assert_eq!(par.to_bits(), seq.to_bits());
    }
}
