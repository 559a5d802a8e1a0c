//! Desk-scale evaluation: synthetic actions, a nearest-neighbour stand-in
//! for the image classifier, dataset export and experiment runners.

mod corpus;
mod experiment;
mod export;
mod knn;
mod synth;

use thiserror::Error;

pub use corpus::{read_corpus, write_corpus, CorpusEntry, LabeledSequence, CORPUS_MANIFEST};
pub use experiment::{
    render_corpus, run_ablation, run_fusion_comparison, run_viewgrid, score_planes, split_folds,
    AblationRow, EvalConfig, ExperimentReport, FusionComparison, Protocol, ViewGridCell,
    ViewGridReport,
};
pub use export::{
    encode_sample, export_dataset, read_manifest, write_manifest, ExportSummary, ManifestEntry,
    SplitRule, MANIFEST_FILE,
};
pub use knn::{knn_scores, DistanceMetric, ImageSample, KnnConfig};
pub use synth::{
    direction_magnitude_specs, generate_synthetic, rest_pose, standard_specs, Generator,
    SyntheticClassSpec,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Render(#[from] crate::rasterizer::RenderError),
    #[error(transparent)]
    Fusion(#[from] crate::fusion::FusionError),
    #[error(transparent)]
    Skeleton(#[from] crate::skeleton_io::SkeletonError),
    #[error("image dimensions differ: {0}")]
    DimMismatch(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{0}")]
    Empty(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl EvalError {
    pub(crate) fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        EvalError::Io {
            path: path.into(),
            source,
        }
    }
}
