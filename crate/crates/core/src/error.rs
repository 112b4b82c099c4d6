use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the segmentation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("raster dimensions {width}x{height}x{channels} do not match buffer length {len}")]
    BadDimensions {
        width: usize,
        height: usize,
        channels: usize,
        len: usize,
    },
    #[error("mask dimensions {mask:?} differ from {expected:?}")]
    DimensionMismatch {
        mask: (usize, usize),
        expected: (usize, usize),
    },
    #[error("bounding box does not intersect the image")]
    EmptyIntersection,
    #[error("empty input mask")]
    EmptyInput,
    #[error("image is constant; 2-means clustering is degenerate")]
    DegenerateClustering,
    #[error("contour has fewer than 3 points")]
    TooFewPoints,
    #[error("internal-energy system is singular (check alpha, beta, gamma)")]
    SingularSystem,
    #[error("no exine boundary found")]
    NoExineBoundary,
    #[error("phantom grains {0} and {1} overlap")]
    SpecOverlap(usize, usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image codec error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
