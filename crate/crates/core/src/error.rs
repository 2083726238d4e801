//! Error type shared by every stage of the pruning toolkit.

use std::path::PathBuf;

/// Broad failure class, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration or arguments.
    Usage,
    /// Filesystem or file-format problem.
    Io,
    /// Numerical degeneracy or inconsistent tensor shapes.
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {what} ({left} vs {right})")]
    DimensionMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("insufficient constraints: need at least {needed}, got {got}")]
    InsufficientConstraints { needed: usize, got: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("no consensus: best model has {inliers} inliers (need {needed})")]
    NoConsensus { inliers: usize, needed: usize },

    #[error("point maps to infinity (w = {w:e})")]
    PointAtInfinity { w: f64 },

    #[error("overlap undefined: a frame corner maps to or beyond infinity")]
    OverlapUndefined,

    #[error("homography is not invertible (det = {det:e})")]
    NotInvertible { det: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("bad magic at byte 0: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("unsupported version {found} at byte {offset} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32, offset: u64 },

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: u64, actual: u64 },

    #[error("truncated header: needed {needed} bytes, file has {actual}")]
    TruncatedHeader { needed: u64, actual: u64 },

    #[error("trailing data: expected {expected} bytes total, found {actual}")]
    TrailingData { expected: u64, actual: u64 },

    #[error("non-finite value at byte {offset}")]
    NonFinite { offset: u64 },

    #[error("header invariant violated at byte {offset}: {detail}")]
    HeaderInvariant { offset: u64, detail: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            InvalidConfig(_) | EmptyInput(_) => ErrorClass::Usage,
            BadMagic { .. }
            | VersionMismatch { .. }
            | TruncatedPayload { .. }
            | TruncatedHeader { .. }
            | TrailingData { .. }
            | NonFinite { .. }
            | HeaderInvariant { .. }
            | UnsupportedFormat(_)
            | UnsupportedMaxval(_)
            | MalformedHeader(_)
            | Inconsistent(_)
            | Io { .. }
            | Json(_) => ErrorClass::Io,
            DimensionMismatch { .. }
            | InsufficientConstraints { .. }
            | Degenerate(_)
            | NoConsensus { .. }
            | PointAtInfinity { .. }
            | OverlapUndefined
            | NotInvertible { .. }
            | ImageTooSmall { .. } => ErrorClass::Numerical,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
