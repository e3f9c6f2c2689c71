use cspace_geom::GeomError;

#[derive(Debug, thiserror::Error)]
pub enum CspaceError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("invalid imaging parameters: {0}")]
    InvalidParams(String),
    #[error("invalid feature: {0}")]
    InvalidFeature(String),
    #[error("unresolved frame: {0}")]
    UnresolvedFrame(String),
    #[error("unsupported orientation for closed-form scaling: {0}")]
    UnsupportedOrientation(String),
    #[error("scaling vector has {got} entries, space has {expected} vertices")]
    VertexCountMismatch { expected: usize, got: usize },
    #[error("scaling collapsed the space: {0}")]
    CollapsedSpace(String),
    #[error("spaces are not compatible: {0}")]
    Incompatible(String),
    #[error("space became empty after {constraint}")]
    EmptyResult { constraint: String },
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CspaceError>;
