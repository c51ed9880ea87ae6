use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cell geometry: {0}")]
    InvalidGeometry(String),

    #[error("meshing failure: {0}")]
    Meshing(String),

    #[error("periodic pairing failure: vertex {vertex} at ({x}, {y}) has no partner")]
    Pairing { vertex: usize, x: f64, y: f64 },

    #[error("tiling failure: {0}")]
    Tiling(String),

    #[error("degenerate triangle {triangle} (signed area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },

    #[error("invalid boundary chain: {0}")]
    InvalidChain(String),

    #[error("conflicting constraints on dof {0}")]
    ConstraintConflict(usize),

    #[error("constraint refers to dof {dof} but the system has dimension {dim}")]
    ConstraintIndex { dof: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "conjugate gradients did not converge after {iterations} iterations \
         (relative residual {residual:e}, target {target:e})"
    )]
    NotConverged {
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("homogenized matrix formulas disagree: relative discrepancy {0:e}")]
    Inconsistent(f64),

    #[error("matrix is not symmetric positive-definite: {0}")]
    NotSpd(String),

    #[error("singular matrix at pivot {0}")]
    Singular(usize),

    #[error("invalid value for `{path}`: {message}")]
    InvalidConfig { path: String, message: String },

    #[error("stability gate violated: tau * l = {0} > 1/2")]
    Stability(f64),

    #[error("initial datum does not vanish on the outer boundary (|u0| = {0:e})")]
    InitialBoundary(f64),

    #[error("oracle `{oracle}`: {message}")]
    Oracle { oracle: String, message: String },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
