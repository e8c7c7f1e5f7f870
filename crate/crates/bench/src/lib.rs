//! Shared fixtures for the benchmarks.

use seriation_core::{sample_graph, Graphon, SampledGraph};

/// Affine-distance graph with `a = 0.8`, dense regime, fixed seed.
pub fn affine_graph(n: usize) -> SampledGraph {
    let w = Graphon::affine_distance(0.8, 1.0).expect("valid parameters");
    sample_graph(&w, n, 1.0, 0xbe9c).expect("valid sampling arguments")
}
