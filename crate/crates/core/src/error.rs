use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Axis of a video-shaped array, used to name the offending dimension in shape errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Frames,
    Height,
    Width,
    Channels,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Axis::Frames => "frames",
            Axis::Height => "height",
            Axis::Width => "width",
            Axis::Channels => "channels",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch on {axis} axis: expected {expected}, found {found}")]
    Shape {
        axis: Axis,
        expected: usize,
        found: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("degenerate histogram: fewer than two distinct intensity levels")]
    DegenerateHistogram,

    #[error(
        "recomposition residual too large: mean abs {mean_abs:.6} exceeds tolerance {tolerance:.6}"
    )]
    DataQuality { mean_abs: f64, tolerance: f64 },

    #[error("ground-truth and input embeddings coincide (no ground-truth change direction)")]
    NoGroundTruthChange,

    #[error("generated and input embeddings coincide (no generated change direction)")]
    NoGeneratedChange,

    #[error("zero-norm embedding vector")]
    ZeroVector,

    #[error("frame {height}x{width} is smaller than the {window}x{window} window")]
    FrameTooSmall {
        height: usize,
        width: usize,
        window: usize,
    },

    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("missing asset: {}", .0.display())]
    MissingAsset(PathBuf),

    #[error("embedding provider: {0}")]
    Provider(String),

    #[error("window {window}: {message}")]
    Window { window: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(axis: Axis, expected: usize, found: usize) -> Self {
        Error::Shape {
            axis,
            expected,
            found,
        }
    }

    /// Short machine-readable category, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape { .. } => "shape",
            Error::Validation(_) => "validation",
            Error::Param(_) => "parameter",
            Error::DegenerateHistogram => "degenerate_histogram",
            Error::DataQuality { .. } => "data_quality",
            Error::NoGroundTruthChange => "no_ground_truth_change",
            Error::NoGeneratedChange => "no_generated_change",
            Error::ZeroVector => "zero_vector",
            Error::FrameTooSmall { .. } => "frame_too_small",
            Error::Manifest { .. } => "manifest",
            Error::MissingAsset(_) => "missing_asset",
            Error::Provider(_) => "provider",
            Error::Window { .. } => "window",
            Error::Io(_) => "io",
            Error::Image(_) => "image",
            Error::Json(_) => "json",
        }
    }
}
