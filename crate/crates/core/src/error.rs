use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("matrix data length {len} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("weights must be strictly positive and finite (entry {index} is {value})")]
    InvalidWeight { index: usize, value: f64 },

    #[error("weight vector has length {weights} but the basis has {rows} rows")]
    WeightMismatch { weights: usize, rows: usize },

    #[error("columns are linearly dependent: pivot norm {pivot:e} at column {column} is below tolerance {tol:e}")]
    RankDeficient { column: usize, pivot: f64, tol: f64 },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("{0} did not converge within the iteration cap")]
    NoConvergence(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("soft thresholding zeroed column {column}; mu is too large for this basis")]
    DegenerateColumn { column: usize },

    #[error("invalid eigen basis: {0}")]
    InvalidBasis(String),

    #[error("leading eigenvalue {leading} is inconsistent with operator kind {kind}")]
    KindMismatch { kind: &'static str, leading: f64 },

    #[error("scan table has no entries")]
    EmptyTable,

    #[error("field is constant (range {0:e}); no level sets to sweep")]
    DegenerateField(f64),

    #[error("graph is disconnected ({0} zero eigenvalues)")]
    Disconnected(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
