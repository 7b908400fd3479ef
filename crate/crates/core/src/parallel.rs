//! Deterministic row-parallel reductions.
//!
//! Rows are evaluated in parallel but their partial results are collected in
//! index order and folded sequentially, so every reduction is bit-identical
//! for any rayon pool size.

use rayon::prelude::*;

/// `Σ_i row(i)` with a thread-count independent summation order.
pub fn sum_rows<F>(n: usize, row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let partials: Vec<f64> = (0..n).into_par_iter().map(row).collect();
    partials.iter().fold(0.0, |acc, v| acc + v)
}

/// Evaluates `row(i)` for every `i` in parallel, preserving index order.
pub fn map_rows<T, F>(n: usize, row: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(row).collect()
}

/// Sum over a slice split into fixed-size chunks; chunk sums are folded in order.
pub fn chunked_sum<T, F>(items: &[T], term: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    const CHUNK: usize = 1024;
    let partials: Vec<f64> = items
        .par_chunks(CHUNK)
        .map(|chunk| chunk.iter().fold(0.0, |acc, t| acc + term(t)))
        .collect();
    partials.iter().fold(0.0, |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reductions_match_across_pool_sizes() {
        let values: Vec<f64> = (0..5000)
            .map(|i| (i as f64).sin() * 1e-3 + 1.0 / (i as f64 + 1.0))
            .collect();
        let mut seen = Vec::new();
        for threads in [1, 3, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let (a, b) = pool.install(|| {
                (
                    sum_rows(values.len(), |i| values[i]),
                    chunked_sum(&values, |v| *v),
                )
            });
            seen.push((a.to_bits(), b.to_bits()));
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]));
    }
}
