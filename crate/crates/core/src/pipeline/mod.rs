//! End-to-end orchestration: wire standardization, the optional nonlocal
//! transform, PCA projection and the merge tree together; generate
//! synthetic benchmarks; read and write the on-disk formats.

pub mod bench;
pub mod config;
pub mod io;
pub mod rng;
pub mod synth;

use std::path::Path;

use crate::error::Result;
use crate::features::{euclidean_distance, fit_pca, project, standardize, FeatureSequence};
use crate::nonlocal::{nonlocal_features, self_similarity_matrix, NonlocalParams, SimilarityMatrix};
use crate::segtree::{build_tree, cut_tree, MergeTree, Segmentation};

pub use bench::{run_benchmark, BenchReport, BenchRow, BenchSpec};
pub use config::{Mode, PipelineConfig, SegmentCount};
pub use synth::{generate_piecewise, SyntheticSpec};

/// Intermediate stage outputs kept for dumping and for re-running pipeline
/// suffixes.
#[derive(Debug, Clone)]
pub struct StageDumps {
    /// The similarity matrix (nonlocal mode only).
    pub similarity: Option<SimilarityMatrix>,
    /// The PCA-projected features the tree was built on (K x C).
    pub projected: FeatureSequence,
    /// Euclidean distance between consecutive projected frames (K - 1
    /// values), the usual boundary-indicator profile.
    pub adjacent_distances: Vec<f64>,
}

/// Result of one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub tree: MergeTree,
    /// Present when the config asked for a fixed segment count.
    pub segmentation: Option<Segmentation>,
    /// Present when the config asked for stage dumps.
    pub stages: Option<StageDumps>,
}

/// Euclidean distance between each pair of consecutive frames.
pub fn adjacent_distance_profile(seq: &FeatureSequence) -> Vec<f64> {
    (1..seq.n_frames())
        .map(|k| euclidean_distance(seq.row(k - 1), seq.row(k)))
        .collect()
}

/// Run the full pipeline on a sequence.
///
/// Local mode: standardize, project onto the main principal components,
/// build the merge tree. Nonlocal mode inserts the self-similarity
/// transform first: standardize, similarity matrix, nonlocal feature rows,
/// standardize again, then PCA and the tree.
pub fn run_pipeline(seq: &FeatureSequence, config: &PipelineConfig) -> Result<PipelineRun> {
    let standardized = standardize(seq);
    let (working, similarity) = match config.mode {
        Mode::Local => (standardized, None),
        Mode::Nonlocal => {
            let kernel_input = if config.standardize_first {
                &standardized
            } else {
                seq
            };
            let params = NonlocalParams {
                patch_radius: config.patch_radius,
                bandwidth: config.bandwidth,
                include_self: config.include_self,
            };
            let sim = self_similarity_matrix(kernel_input, &params)?;
            let nl = standardize(&nonlocal_features(&sim));
            (nl, Some(sim))
        }
    };

    let model = fit_pca(&working, config.n_components)?;
    let projected = project(&working, &model)?;
    let tree = build_tree(&projected);

    let segmentation = match config.n_segments {
        SegmentCount::Fixed(n) => Some(cut_tree(&tree, n)?),
        SegmentCount::Sweep => None,
    };

    let stages = config.dump_stages.then(|| StageDumps {
        similarity,
        adjacent_distances: adjacent_distance_profile(&projected),
        projected,
    });

    Ok(PipelineRun {
        tree,
        segmentation,
        stages,
    })
}

/// Write stage dumps as CSV matrices under `dir`, prefixed with the
/// sequence id: `<id>.similarity.csv` (nonlocal mode), `<id>.components.csv`
/// and `<id>.adjacent.csv`.
pub fn write_dumps(dumps: &StageDumps, dir: &Path, sequence_id: &str) -> Result<()> {
    if let Some(sim) = &dumps.similarity {
        io::write_similarity_csv(&dir.join(format!("{sequence_id}.similarity.csv")), sim)?;
    }
    io::write_features_csv(
        &dir.join(format!("{sequence_id}.components.csv")),
        &dumps.projected,
    )?;
    io::write_column_csv(
        &dir.join(format!("{sequence_id}.adjacent.csv")),
        &dumps.adjacent_distances,
    )?;
    Ok(())
}
