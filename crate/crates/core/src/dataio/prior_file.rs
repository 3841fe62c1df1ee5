//! Fitted priors on disk.
//!
//! ```text
//! version=1
//! kind=wishart
//! dim=1
//! contrast=equal.means
//! nu=7.2e0
//! lambda=1.5e0
//! ```

use std::path::Path;

use super::kv::{fmt_f64, fmt_list, KvFile};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, SpdMatrix};
use crate::model::{FitReport, Prior, SimplePrior, WishartPrior};

pub const PRIOR_FORMAT_VERSION: &str = "1";

/// A prior with the hypothesis whose coordinates it was fitted in.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorFile {
    pub prior: Prior,
    /// Dimension of the space the prior lives in (the contrast rank).
    pub dim: usize,
    /// Hypothesis name, or `custom`.
    pub contrast: String,
    pub loglik: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub genes_used: Option<usize>,
}

impl PriorFile {
    pub fn from_fit(report: &FitReport, dim: usize, contrast: &str) -> Self {
        PriorFile {
            prior: report.prior.clone(),
            dim,
            contrast: contrast.to_string(),
            loglik: Some(report.loglik),
            iterations: Some(report.iterations),
            converged: Some(report.converged),
            genes_used: Some(report.genes_used),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# fitted prior\nversion={PRIOR_FORMAT_VERSION}\n");
        match &self.prior {
            Prior::Wishart(p) => {
                out.push_str(&format!(
                    "kind=wishart\ndim={}\ncontrast={}\n",
                    p.dim(),
                    self.contrast
                ));
                out.push_str(&format!("nu={}\n", fmt_f64(p.nu())));
                out.push_str(&format!(
                    "lambda={}\n",
                    fmt_list(p.lambda().matrix().as_slice())
                ));
            }
            Prior::Simple(p) => {
                out.push_str(&format!(
                    "kind=simple\ndim={}\ncontrast={}\n",
                    self.dim, self.contrast
                ));
                out.push_str(&format!(
                    "rate={}\nshape={}\n",
                    fmt_f64(p.rate()),
                    fmt_f64(p.shape())
                ));
            }
        }
        if let Some(v) = self.loglik {
            out.push_str(&format!("loglik={}\n", fmt_f64(v)));
        }
        if let Some(v) = self.iterations {
            out.push_str(&format!("iterations={v}\n"));
        }
        if let Some(v) = self.converged {
            out.push_str(&format!("converged={v}\n"));
        }
        if let Some(v) = self.genes_used {
            out.push_str(&format!("genes_used={v}\n"));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let kv = KvFile::parse(text, path)?;
        let version = kv.require("version")?;
        if version != PRIOR_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version.to_string(),
                expected: PRIOR_FORMAT_VERSION.to_string(),
            });
        }
        let dim: usize = kv.required("dim")?;
        let contrast = kv.require("contrast")?.to_string();
        let prior = match kv.require("kind")? {
            "wishart" => {
                let lambda = kv.list("lambda")?.unwrap_or_default();
                if lambda.len() != dim * dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim * dim,
                        found: lambda.len(),
                    });
                }
                let lambda = SpdMatrix::new(Matrix::from_row_major(dim, dim, lambda)?)?;
                Prior::Wishart(WishartPrior::new(lambda, kv.required("nu")?)?)
            }
            "simple" => Prior::Simple(SimplePrior::new(
                kv.required("rate")?,
                kv.required("shape")?,
            )?),
            other => {
                let e = kv.entry("kind").expect("present");
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: e.line,
                    column: 6,
                    message: format!("unknown prior kind '{other}'"),
                });
            }
        };
        Ok(PriorFile {
            prior,
            dim,
            contrast,
            loglik: kv.parsed("loglik")?,
            iterations: kv.parsed("iterations")?,
            converged: kv.parsed("converged")?,
            genes_used: kv.parsed("genes_used")?,
        })
    }
}

pub fn save_prior(file: &PriorFile, path: &Path) -> Result<()> {
    std::fs::write(path, file.to_text()).map_err(|e| Error::io(path, e))
}

/// Loads a prior; an unreadable file is reported as a parse error on `path`.
pub fn load_prior(path: &Path) -> Result<PriorFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        column: 0,
        message: format!("cannot read prior file: {e}"),
    })?;
    PriorFile::parse(&text, path)
}

/// Checks a loaded prior against the dimension the data will be tested in.
pub fn check_prior_dim(file: &PriorFile, expected: usize) -> Result<()> {
    if file.dim != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: file.dim,
        });
    }
    Ok(())
}
