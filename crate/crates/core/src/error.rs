use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid specification: {0}")]
    InvalidSpec(String),

    #[error("multi-index {index:?} out of range for grid of size {size} per dimension")]
    IndexOutOfRange { index: Vec<i64>, size: usize },

    #[error("flat index {index} out of range (grid has {len} points)")]
    FlatIndexOutOfRange { index: usize, len: usize },

    #[error("empty mask: no grid point lies inside the domain")]
    EmptyMask,

    #[error("malformed mask file {}: line {line}: {message}", path.display())]
    MaskFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("vector length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dense materialization of {entries} entries exceeds the cap of {cap}")]
    DenseCapExceeded { entries: usize, cap: usize },

    #[error(
        "plunge rank {needed} exceeds min(N_omega, N_lambda) = {limit}; \
         the mask is too small for the oversampled frame setting"
    )]
    RankExceeded { needed: usize, limit: usize },

    #[error("point {0:?} lies outside the bounding box")]
    PointOutsideBox(Vec<f64>),

    #[error("{op} is only implemented for dimension 2 (got {dim})")]
    UnsupportedDimension { op: &'static str, dim: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
