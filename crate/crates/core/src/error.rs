use std::fmt;

use thiserror::Error;

/// Mesh invariant that a validation pass found violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshInvariant {
    IndexRange,
    Orientation,
    NonManifold,
    BoundaryMismatch,
    ZeroTag,
}

impl fmt::Display for MeshInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MeshInvariant::IndexRange => "vertex index range",
            MeshInvariant::Orientation => "orientation",
            MeshInvariant::NonManifold => "non-manifold edge",
            MeshInvariant::BoundaryMismatch => "boundary edge consistency",
            MeshInvariant::ZeroTag => "nonzero boundary tag",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("mesh invariant violated ({invariant}): {detail}")]
    Validation {
        invariant: MeshInvariant,
        detail: String,
    },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("matrix is singular to working precision (pivot row {row})")]
    Singular { row: usize },

    #[error("range error: {0}")]
    Range(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual history {history:?})")]
    Convergence { iterations: usize, history: Vec<f64> },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
