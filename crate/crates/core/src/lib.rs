//! Nonlocal self-similarity feature enhancement for temporal segmentation
//! of feature-vector sequences.
//!
//! Very-low-frame-rate image streams (and time series in general) often
//! show abrupt appearance changes even between adjacent frames, which
//! derails segmenters that rely on local feature differences. This crate
//! models each frame instead by its similarity to *every* other frame,
//! computed over small temporal neighborhoods with an exponential kernel
//! whose bandwidth is calibrated from the data. The resulting
//! row-stochastic similarity rows replace the local features and feed the
//! same downstream machinery: standardization, projection onto the main
//! principal components, and a neighbor-constrained hierarchical merge
//! tree that is cut into the requested number of segments.
//!
//! The crate is organized around five building blocks:
//!
//! * [`features`]: the [`FeatureSequence`](features::FeatureSequence)
//!   currency type, standardization and PCA;
//! * [`nonlocal`]: patch distances, bandwidth calibration and the
//!   self-similarity matrix;
//! * [`segtree`]: the neighbor-constrained merge tree and tree cutting;
//! * [`eval`]: tolerance-matched boundary precision/recall/F-measure and
//!   the best-F sweep over segment counts;
//! * [`pipeline`]: orchestration, synthetic benchmarks, file formats and
//!   the deterministic generator behind them.
//!
//! Everything is deterministic: identical inputs and seeds produce
//! identical outputs, byte for byte.

pub mod error;
pub mod eval;
pub mod features;
mod linalg;
pub mod nonlocal;
pub mod pipeline;
pub mod segtree;

pub use error::{Error, Result};
pub use eval::{best_f_over_cuts, f_measure, match_boundaries, EvalReport};
pub use features::{fit_pca, project, standardize, FeatureSequence, PcaModel};
pub use nonlocal::{
    calibrate_h, neighborhood_distance, nonlocal_features, self_similarity_matrix, Bandwidth,
    NonlocalParams, SimilarityMatrix,
};
pub use pipeline::{
    run_benchmark, run_pipeline, BenchReport, BenchSpec, Mode, PipelineConfig, PipelineRun,
    SegmentCount, StageDumps, SyntheticSpec,
};
pub use segtree::{build_tree, cut_tree, Merge, MergeTree, Segmentation};
