//! Crate-wide error type. Decomposition failures are loud and carry enough
//! context to reproduce them.

use crate::rat::Rat;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("polyhedron is empty")]
    Empty,

    #[error("linear program is unbounded in the probed direction")]
    Unbounded,

    /// A coordinate minimum came out fractional while scanning for an
    /// integral vertex. That can only happen when the polyhedron is not
    /// box-integer, so the input is outside the supported class.
    #[error("not box-integer: coordinate {coord} attains fractional minimum {value}")]
    NotBoxIntegral { coord: usize, value: Rat },

    #[error("not a member: {reason}")]
    NotMember { reason: String },

    /// The merged decomposition failed the affine-independence re-check.
    /// This indicates a bug or an input outside the supported class; it is
    /// never papered over.
    #[error("decomposition points are affinely dependent")]
    AffineDependence,

    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// Malformed instance file, with serde's line/column diagnostics.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("the two matroids have different ranks ({left} vs {right}); no common base exists")]
    RankMismatch { left: u64, right: u64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn not_member(reason: impl Into<String>) -> Self {
        Error::NotMember {
            reason: reason.into(),
        }
    }

    pub fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidInstance(reason.into())
    }

    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotMember { .. } => 2,
            Error::NotBoxIntegral { .. } => 3,
            Error::AffineDependence => 4,
            _ => 1,
        }
    }
}
