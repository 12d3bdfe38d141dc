use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the degradation and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid optical configuration: {0}")]
    InvalidConfig(String),

    #[error("aperture grid too coarse: {0}")]
    Resolution(String),

    #[error("aperture transmits no light")]
    DegenerateAperture,

    #[error("kernel for q = {q} collapses below 3x3 support")]
    DegenerateKernel { q: f64 },

    #[error("size mismatch: {0}")]
    Size(String),

    #[error("target GSD must exceed source GSD (source {source_gsd} m/px, target {target_gsd} m/px)")]
    NotDegradation { source_gsd: f64, target_gsd: f64 },

    #[error("degraded image would be {width}x{height} px, below the 8 px minimum")]
    ImageTooSmall { width: usize, height: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dataset has no records")]
    EmptyDataset,

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// True for failures of the filesystem or of decoding external files.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Image { .. } | Error::Json { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
