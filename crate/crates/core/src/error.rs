use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("depth view has no occupied bins")]
    EmptyView,

    #[error("feature vector has zero mass: {0}")]
    EmptyFeature(String),

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("knowledge base has no categories; teach one first")]
    NoKnowledge,

    #[error("format error: {0}")]
    Format(String),

    #[error("grasp map has no finite quality value")]
    EmptyMap,

    #[error("no occupied bin within the grasp neighborhood")]
    EmptyNeighborhood,

    #[error("no collision-free grasp among {0} candidates")]
    NoValidGrasp(usize),

    #[error("{}: {source}", path.display())]
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

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateGeometry(msg.into())
    }

    /// True for errors caused by bad input data rather than bad arguments.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_))
    }
}
