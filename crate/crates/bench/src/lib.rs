//! Benchmark fixtures shared by the criterion benches.

use edgesync_core::graph::random_connected_graph;
use edgesync_core::{Matrix, WeightedGraph};

/// Seeded connected graph with weights in `[0.1, 6]`.
pub fn fixture_graph(n: usize) -> WeightedGraph {
    random_connected_graph(n, 0.3, (0.1, 6.0), n as u64).expect("valid fixture")
}

/// Symmetric `n×n` matrix with a spread spectrum.
pub fn fixture_symmetric(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        let (a, b) = (i.min(j) as f64, i.max(j) as f64);
        (a + 1.0) / (b + 2.0) + if i == j { n as f64 } else { 0.0 }
    })
}
