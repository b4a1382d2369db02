use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the mlbp library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: unsupported image format ({detail})")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("{path}: malformed image data ({detail})")]
    MalformedImage { path: PathBuf, detail: String },

    #[error("{path}: image has a zero dimension")]
    ZeroDimension { path: PathBuf },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampling coordinate ({x}, {y}) outside image bounds {width}x{height}")]
    CoordinateOutOfRange {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("pixel ({x}, {y}) is not interior for radius {radius} in a {width}x{height} image")]
    NotInterior {
        x: usize,
        y: usize,
        radius: f64,
        width: usize,
        height: usize,
    },

    #[error("image {width}x{height} too small for neighborhood radius {radius}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        radius: f64,
    },

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative feature entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("requested {requested} neighbors but only {available} training samples")]
    NotEnoughTrainingSamples { requested: usize, available: usize },

    #[error("invalid cross-validation setup: {0}")]
    InvalidFolds(String),

    #[error("{path}:{line}: manifest error: {detail}")]
    Manifest {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("{path}:{line}: feature store error: {detail}")]
    Store {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("feature store spec mismatch: {0}")]
    SpecMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
