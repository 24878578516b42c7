use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("mesh has no triangles")]
    EmptyMesh,

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: String, message: String },

    #[error("mesh is not watertight ({boundary_edges} boundary or non-manifold edges)")]
    NotWatertight { boundary_edges: usize },

    #[error("open contour chain at z = {z} mm (gap {gap} mm)")]
    OpenChain { z: f64, gap: f64 },

    #[error("unsupported topology in layer {layer}: {message}")]
    UnsupportedTopology { layer: usize, message: String },

    #[error("self-intersecting contour: {0}")]
    SelfIntersection(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank-deficient point set: {0}")]
    RankDeficient(String),

    #[error("layer {layer}: {source}")]
    Layer {
        layer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage} stage: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for I/O and file-format failures, as opposed to invalid inputs.
    pub fn is_io_or_parse(&self) -> bool {
        match self {
            Error::Io(_) | Error::Parse { .. } => true,
            Error::File { source, .. } | Error::Layer { source, .. } | Error::Stage { source, .. } => source.is_io_or_parse(),
            _ => false,
        }
    }
}
