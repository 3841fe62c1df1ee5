//! Moderated multivariate tests for replicated multi-condition expression
//! data. Per-gene covariance matrices are shrunk toward an inverse-Wishart
//! prior fitted across genes, and the resulting Hotelling-type statistics are
//! followed by Benjamini-Hochberg selection.

pub mod cli;
pub mod dataio;
pub mod dist;
pub mod error;
pub mod matrix;
pub mod model;
pub mod multiplicity;
pub mod report;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
