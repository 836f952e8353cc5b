//! Shared fixtures for the clearing benchmarks.

use fairclear_core::instance::CompatibilityGraph;
use fairclear_core::randmodel::{sample_graph, ModelParams};

/// A mid-sized random-model instance with a fixed seed.
pub fn bench_graph(n: usize, seed: u64) -> CompatibilityGraph {
    let params = ModelParams {
        n,
        lam: 0.85,
        beta: 0.06,
        edge_prob_low: 0.3,
        edge_prob_high: 0.08,
        seed,
        ..ModelParams::default()
    };
    sample_graph(&params).expect("bench parameters are admissible")
}
