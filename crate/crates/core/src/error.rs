use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "eigensolver failed to converge after {iterations} QR sweeps \
         (active block {lo}..={hi} of a {dim}x{dim} matrix)"
    )]
    NoConvergence {
        iterations: usize,
        lo: usize,
        hi: usize,
        dim: usize,
    },

    #[error("invalid model: {0}")]
    InvalidModel(ValidationReport),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Deficient (Jordan) cluster on the unit circle. Impossible for a CPTP
    /// Floquet map, so it signals numerical trouble or a non-CPTP input.
    #[error("spectral integrity error: {0}")]
    Integrity(String),

    #[error("steady-state extraction failed: {0}")]
    Extraction(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate steady space: {0}")]
    DegenerateSteadySpace(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("model data error: {0}")]
    ModelData(String),

    #[error("k-point {index} (k = {k}): {source}")]
    KPoint {
        index: usize,
        k: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(std::io::Error::other(e))
    }
}
