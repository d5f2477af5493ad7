use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty request: {0}")]
    EmptyRequest(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate point cloud: all points coincide")]
    DegenerateCloud,

    #[error("degenerate image: no foreground pixel landed on the canvas")]
    DegenerateImage,

    #[error("divergent system: iterate {iteration} is not finite")]
    DivergentSystem { iteration: usize },

    #[error("class generation failed after {attempts} rejected samples: {reason}")]
    ClassGenerationFailure { attempts: usize, reason: String },

    #[error("instance {instance}, viewpoint {viewpoint:?}: {source}")]
    InView {
        instance: usize,
        viewpoint: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("manifest not found at {0}")]
    ManifestMissing(PathBuf),

    #[error("malformed manifest: {0}")]
    Manifest(String),

    #[error("png encoding: {0}")]
    Encode(#[from] png::EncodingError),

    #[error("png decoding: {0}")]
    Decode(#[from] png::DecodingError),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
