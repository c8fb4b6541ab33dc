use thiserror::Error;

/// Errors produced by the rectification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Intrinsics with non-positive focal length or non-finite fields.
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),

    /// A coordinate or parameter that must be finite was not.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A point projected with non-positive depth.
    #[error("point behind camera (homogeneous z = {z})")]
    BehindCamera { z: f64 },

    /// A patch or sample position fell outside the image.
    #[error("patch out of bounds: center ({u}, {v}), radius {radius}, image {width}x{height}")]
    PatchOutOfBounds {
        u: i64,
        v: i64,
        radius: usize,
        width: usize,
        height: usize,
    },

    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// Not enough matches to attempt a solve.
    #[error("too few matches: need at least {needed}, got {got}")]
    TooFewMatches { needed: usize, got: usize },

    /// The match geometry cannot identify the requested parameters.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// An operation that needs at least one match received none.
    #[error("empty match set")]
    EmptyMatchSet,

    /// File format violation (CSV, PGM, JSON reports).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
