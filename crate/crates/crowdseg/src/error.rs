//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A mask, map, or matrix does not match the expected dimensions.
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: String, got: String },

    /// Two aligned collections have different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// An operation over a point set received no points.
    #[error("empty point set")]
    EmptyPointSet,

    /// A point lies outside the scene bounds.
    #[error("point ({x}, {y}) out of bounds for {width}x{height} scene")]
    OutOfBounds { x: f64, y: f64, width: u32, height: u32 },

    /// The scene carries no ground-truth masks but the operation needs them.
    #[error("scene has no ground-truth masks")]
    MissingGroundTruth,

    /// Scorer training received no groups.
    #[error("empty training set")]
    EmptyTrainingSet,

    /// Point matching received ground-truth points but no predictions.
    #[error("no predictions to match against {gt} ground-truth points")]
    NoPredictions { gt: usize },

    /// The assignment problem admits no solution.
    #[error("infeasible matching: {0}")]
    Infeasible(String),

    /// Rejection sampling could not place all requested heads.
    #[error("placement failure: placed {placed} of {requested} heads within {attempts} attempts")]
    PlacementFailure { placed: usize, requested: usize, attempts: usize },

    /// Evaluation against an empty ground-truth set.
    #[error("empty ground truth")]
    EmptyGroundTruth,

    /// Malformed data in an input file.
    #[error("invalid data in {path}: {reason}")]
    InvalidData { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("image encode error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn size_mismatch(expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::SizeMismatch { expected: expected.into(), got: got.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }

    pub(crate) fn invalid_data(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::InvalidData { path: path.into(), reason: reason.into() }
    }
}
