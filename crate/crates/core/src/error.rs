use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gene {gene}: degenerate sample ({reason})")]
    DegenerateGene { gene: String, reason: String },

    #[error("non-positive degrees of freedom: {0}")]
    DegreesOfFreedom(f64),

    #[error("contrast is rank deficient: declared rank {declared}, numerical rank {numerical}")]
    RankDeficiency { declared: usize, numerical: usize },

    #[error("too few usable genes for fitting: {found} < {required}")]
    TooFewGenes { found: usize, required: usize },

    #[error("optimizer did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("no root in bracket [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("{path}:{line}:{column}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("duplicate gene id '{0}'")]
    DuplicateGene(String),

    #[error("unsupported file version {found} (expected {expected})")]
    VersionMismatch { found: String, expected: String },

    #[error("inadmissible hypothesis: {0}")]
    Admissibility(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
