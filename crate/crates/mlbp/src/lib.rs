//! Texture description with modified local binary patterns (MLBP) and a
//! Tanimoto-distance nearest-neighbor classifier.
//!
//! The pipeline: preprocess an image (Gaussian smoothing, resize to a
//! canonical W x W frame), label every interior pixel with its MLBP label,
//! and collect the labels into a probabilistic histogram of dimension P+2.
//! Histograms are compared with the Tanimoto (Soergel) distance and
//! classified by majority vote over the T nearest training samples.
//! Stratified k-fold cross-validation and per-image runtime benchmarking
//! close the loop for dataset experiments.

pub mod classify;
pub mod error;
pub mod eval;
pub mod image;
pub mod io;
pub mod lbp;
pub mod preprocess;
pub mod rng;
pub mod store;
pub mod synth;

pub use classify::{
    euclidean_distance, knn_classify, tanimoto_distance, KnnConfig, Metric, Prediction, Sample,
};
pub use error::{Error, Result};
pub use eval::{
    benchmark_runtime, cross_validate, stratified_kfold, BenchReport, EvalReport, FoldPlan,
    TimingStats,
};
pub use image::GrayImage;
pub use io::{load_image, write_pgm};
pub use lbp::{
    bilinear_at, extract, extract_multiscale, histogram_features, label_image, lbp_code,
    mlbp_label, sample_neighbors, BinaryPattern, FeatureVector, LabelImage, NeighborhoodSpec,
};
pub use preprocess::{gaussian_smooth, preprocess, resize_bilinear, PreprocessConfig};
pub use store::{read_features, read_manifest, scan_directory, write_features, FeatureStore, Manifest};

/// Library-wide defaults, shared by the CLI so flags and docs cannot drift.
pub mod defaults {
    pub const NEIGHBORS: usize = 8;
    pub const RADIUS: f64 = 1.0;
    /// `floor(NEIGHBORS / 4)`.
    pub const UNIFORMITY_THRESHOLD: u32 = 2;
    pub const TARGET_SIZE: usize = 128;
    pub const GAUSSIAN_SIGMA: f64 = 1.0;
    pub const KERNEL_RADIUS: usize = 2;
    pub const KNN_NEIGHBORS: usize = 3;
    pub const FOLDS: usize = 10;
    pub const SEED: u64 = 42;
}
