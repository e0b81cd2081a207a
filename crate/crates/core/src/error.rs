use thiserror::Error;

use crate::oracle::OracleResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    /// An argument is outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("unsupported traffic pattern: {0}")]
    UnsupportedPattern(String),

    #[error("no partition geometry of {midplanes} midplanes fits machine {machine}")]
    NoGeometry { machine: String, midplanes: u64 },

    #[error("partitions must be whole midplanes of 512 nodes ({nodes} nodes requested)")]
    SubMidplane { nodes: u64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The exhaustive oracle ran out of budget. `best` is the best subset seen
    /// among the first `examined` candidates and is NOT a certified minimum.
    #[error("oracle budget exhausted after {examined} of {total} subsets")]
    BudgetExceeded {
        examined: u64,
        total: u128,
        best: Option<Box<OracleResult>>,
    },
}
