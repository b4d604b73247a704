use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic {0:?}, expected \"USCD\"")]
    BadMagic([u8; 4]),

    #[error("unsupported USCD version {0}")]
    UnsupportedVersion(u8),

    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("dimensions {0}x{1}x{2} overflow the addressable payload size")]
    DimensionOverflow(u32, u32, u32),

    #[error("malformed header: {0}")]
    Header(String),

    #[error("invalid probe configuration: {0}")]
    InvalidProbe(String),

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape { expected: Vec<usize>, got: Vec<usize> },

    #[error("non-finite sample at index {0:?}")]
    NonFinite(Vec<usize>),

    #[error("expected {expected:?} channel data, got {got:?}")]
    Alignment {
        expected: crate::types::Alignment,
        got: crate::types::Alignment,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("empty region: {0}")]
    EmptyRegion(&'static str),

    #[error("image too small: {height}x{width} needs at least {min} pixels per side")]
    ImageTooSmall { height: usize, width: usize, min: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("png: {0}")]
    Png(String),

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}
