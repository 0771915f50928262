use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("strength factor alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("chips per bit must be at least 1")]
    ZeroChipsPerBit,

    #[error("mid-band mask is empty")]
    EmptyMask,

    #[error("mid-band mask position ({0}, {1}) is invalid")]
    InvalidMaskPosition(usize, usize),

    #[error(
        "image of {width}x{height} has zero watermark capacity for {chips_per_bit} chips per bit"
    )]
    ZeroCapacity {
        width: usize,
        height: usize,
        chips_per_bit: usize,
    },

    #[error("payload of {bits} bits exceeds capacity of {capacity} bits")]
    CapacityExceeded { bits: usize, capacity: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("maximum-likelihood scale is undefined for an all-zero sample")]
    DegenerateSample,

    #[error("likelihood vanishes under both hypotheses at chip {0}")]
    VanishingLikelihood(usize),

    #[error("malformed key record: {0}")]
    KeyFormat(String),

    #[error("malformed config: {0}")]
    Config(String),

    #[error("image format error: {0}")]
    ImageFormat(String),

    #[error("codec failure: {0}")]
    Codec(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(expected: (usize, usize), actual: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected: format!("{}x{}", expected.0, expected.1),
            actual: format!("{}x{}", actual.0, actual.1),
        }
    }
}
