use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("image must be at least {min}x{min} pixels, got {width}x{height}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("buffer holds {actual} samples but {width}x{height} needs {expected}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("dimension mismatch: expected {expected:?}, got {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("canny high threshold {0} outside [1, 1443]")]
    ThresholdOutOfRange(f64),
    #[error("clip contains no frames")]
    EmptyClip,
    #[error("lane has {found} points but h_samples has {expected}")]
    LaneLength { expected: usize, found: usize },
    #[error("record `{raw_file}`: {reason}")]
    InvalidRecord { raw_file: String, reason: String },
    #[error("duplicate raw_file `{0}`")]
    DuplicateFrame(String),
    #[error("no prediction for ground-truth frames: {}", .0.join(", "))]
    MissingFrames(Vec<String>),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
