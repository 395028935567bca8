//! Execution policy for the data-parallel loops (quadrature chunks, batches
//! of averaging points, parameter sweeps).
//!
//! Results are always collected in input order, so parallel and sequential
//! runs produce bit-identical output. Without the `parallel` feature every
//! policy runs sequentially.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Maps `f` over a slice, returning results in input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }
}

/// Pairwise (cascade) summation of equally sized vectors in a fixed tree
/// order.
pub fn pairwise_sum(parts: &[Vec<Complex64>], dim: usize) -> Vec<Complex64> {
    match parts.len() {
        0 => vec![Complex64::default(); dim],
        1 => parts[0].clone(),
        n => {
            let (lo, hi) = parts.split_at(n / 2);
            let a = pairwise_sum(lo, dim);
            let b = pairwise_sum(hi, dim);
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        }
    }
}
