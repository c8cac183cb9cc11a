use thiserror::Error;

use crate::metric::ValidationReport;
use crate::twisted::CompatibilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: non-square matrix, non-finite entry, mismatched labels.
    #[error("structural error: {0}")]
    Structural(String),

    /// A scalar or function parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("not a metric: {0}")]
    NotMetric(ValidationReport),

    #[error("twisted union compatibility conditions fail: {0}")]
    Incompatible(Box<CompatibilityReport>),

    /// Exact cut enumeration is limited to `cap` points.
    #[error("{n} points exceeds the exact cut-cone cap of {cap}; use the sampled (upper bound only) mode")]
    SizeCap { n: usize, cap: usize },

    #[error("LP solver failure: {0}")]
    Solver(String),

    /// An assembly precondition failed at a concrete pair of points.
    #[error("precondition `{condition}` fails at pair ({}, {}): {detail}", witness.0, witness.1)]
    Precondition {
        condition: String,
        witness: (usize, usize),
        detail: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
