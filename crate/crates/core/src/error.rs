//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by validation, synthesis, parsing, and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{start}, {end}): {reason}")]
    InvalidInterval {
        start: f64,
        end: f64,
        reason: &'static str,
    },

    #[error("caption is empty after trimming whitespace")]
    EmptyCaption,

    #[error("invalid annotation for video '{video_id}'{}: {detail}", segment.map(|i| format!(" segment {i}")).unwrap_or_default())]
    InvalidAnnotation {
        video_id: String,
        segment: Option<usize>,
        detail: String,
    },

    #[error("video '{video_id}' has {have} segment(s); operation requires at least {need}")]
    TooFewSegments {
        video_id: String,
        have: usize,
        need: usize,
    },

    #[error("invalid swap indices ({a}, {b}) for {len} segments: {reason}")]
    InvalidSwapIndices {
        a: usize,
        b: usize,
        len: usize,
        reason: &'static str,
    },

    #[error("segments of video '{video_id}' collapse on the frame grid at {fps} fps; segment {segment} has no frames of its own")]
    FrameGridCollision {
        video_id: String,
        segment: usize,
        fps: f64,
    },

    #[error("frame plan error: {0}")]
    FramePlan(String),

    #[error("media error: {0}")]
    Media(String),

    #[error("ground truth is empty; ratio is undefined")]
    EmptyGroundTruth,

    #[error("label lists differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("input is empty")]
    EmptyInput,

    #[error("schema error in {}: {detail}", path.display())]
    Schema { path: PathBuf, detail: String },

    #[error("unusable prediction input: {0}")]
    ParseFailure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
