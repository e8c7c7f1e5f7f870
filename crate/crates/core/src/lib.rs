//! Spectral seriation of graphs sampled from graphons, with the split-and-merge
//! post-processing refinement, assumption validators and an experiment harness.
//!
//! Vertices are identified by `1..=n` throughout the public API.

pub mod error;
pub mod graph;
pub mod graphon;
pub mod harness;
pub mod matrix;
pub mod order;
pub mod postproc;
pub mod rng;
pub mod spectral;
pub mod validate;

pub use error::{Result, SeriationError};
pub use graph::{sample_graph, SampledGraph};
pub use graphon::{Embedding, Family, Graphon, GraphonConfig, GraphonSpec, ModelMatrix};
pub use matrix::DenseMatrix;
pub use order::{
    check_aligned, good_partition_sizes, kendall_tau, l1_distance, linf_distance, merge_orderings,
    ordering_from_slices, ordering_from_values, Alignment, Ordering,
};
pub use spectral::{
    discretized_graphon_laplacian, fiedler_pair, fiedler_pair_with, laplacian, operator_norm_diff,
    spectral_seriation, LaplacianMatrix, SolverMethod, SpectralResult,
};
pub use postproc::{
    full_postprocess, learn_alpha_beta, sample_good_partition, split_postprocess, GoodPartition, NeighborStats,
    SplitConfig,
};
pub use harness::{fit_slope, run_experiment, Algorithm, ExperimentConfig, ExperimentOutcome, RunKind, TrialRecord};
pub use validate::{check_assumptions, fiedler_consistency_study, laplacian_convergence_study, AssumptionReport};
