//! Marginal densities of the per-gene cross-product matrix after the random
//! covariance has been integrated out, and the matching conjugate posterior.

use super::prior::{SimplePrior, WishartPrior};
use super::sample::GeneSample;
use crate::dist::{ln_gamma, ln_multigamma};
use crate::error::{Error, Result};
use crate::matrix::{logdet, logdet_in_place, Matrix, SpdMatrix};

/// Sum of per-gene marginal log-densities plus the genes left out.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalLik {
    pub value: f64,
    pub used: usize,
    pub excluded: Vec<String>,
}

/// Log marginal density of `A = (n-1)S` under the normal/inverse-Wishart model:
///
/// `lnΓ_d((ν+n-d-2)/2) - lnΓ_d((n-1)/2) - lnΓ_d((ν-d-1)/2)
///  + (ν-d-1)/2 log|Λ| + (n-d-2)/2 log|A| - (ν+n-d-2)/2 log|Λ+A|`
pub fn gene_log_marginal(prior: &WishartPrior, a: &Matrix, n: usize) -> Result<f64> {
    let d = prior.dim();
    if a.rows() != d || a.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: a.rows(),
        });
    }
    if !prior.is_proper() {
        return Err(Error::domain("marginal density needs nu > 2d"));
    }
    let (nu, nf, df) = (prior.nu(), n as f64, d as f64);
    let logdet_a = logdet(a)?;
    let logdet_sum = logdet(&(prior.lambda().matrix() + a))?;
    Ok(ln_multigamma(d, (nu + nf - df - 2.0) / 2.0)?
        - ln_multigamma(d, (nf - 1.0) / 2.0)?
        - ln_multigamma(d, (nu - df - 1.0) / 2.0)?
        + 0.5 * (nu - df - 1.0) * prior.lambda().logdet()
        + 0.5 * (nf - df - 2.0) * logdet_a
        - 0.5 * (nu + nf - df - 2.0) * logdet_sum)
}

/// `Σ_g log f(A_g)`; genes whose `A_g` is singular are skipped and listed.
pub fn marginal_loglik(prior: &WishartPrior, samples: &[GeneSample]) -> Result<MarginalLik> {
    let mut value = 0.0;
    let mut used = 0;
    let mut excluded = Vec::new();
    for s in samples {
        if s.dim() != prior.dim() {
            return Err(Error::DimensionMismatch {
                expected: prior.dim(),
                found: s.dim(),
            });
        }
        match gene_log_marginal(prior, s.crossprod(), s.n()) {
            Ok(v) => {
                value += v;
                used += 1;
            }
            Err(Error::NotPositiveDefinite { .. }) | Err(Error::Domain(_)) if prior.is_proper() => {
                excluded.push(s.id().to_string())
            }
            Err(e) => return Err(e),
        }
    }
    Ok(MarginalLik {
        value,
        used,
        excluded,
    })
}

/// Log marginal density of the residual scalar `R ~ σ² χ²(m)` with
/// `1/σ² ~ Gamma(s, rate r)`:
/// `Γ(s+m/2)/(Γ(s)Γ(m/2)) (2r)^s R^{m/2-1} / (2r+R)^{s+m/2}`.
pub fn simple_log_marginal(prior: &SimplePrior, r: f64, m: f64) -> f64 {
    let (rate, s) = (prior.rate(), prior.shape());
    ln_gamma(s + m / 2.0) - ln_gamma(s) - ln_gamma(m / 2.0)
        + s * (2.0 * rate).ln()
        + (m / 2.0 - 1.0) * r.ln()
        - (s + m / 2.0) * (2.0 * rate + r).ln()
}

/// Residual scalar and its degrees of freedom `(R_g, d(n_g-1))`.
pub fn residual_scalar(sample: &GeneSample) -> (f64, f64) {
    (
        sample.residual_sum_squares(),
        (sample.dim() * (sample.n() - 1)) as f64,
    )
}

pub fn simple_marginal_loglik(prior: &SimplePrior, samples: &[GeneSample]) -> MarginalLik {
    let mut value = 0.0;
    let mut used = 0;
    let mut excluded = Vec::new();
    for s in samples {
        let (r, m) = residual_scalar(s);
        if r > 0.0 {
            value += simple_log_marginal(prior, r, m);
            used += 1;
        } else {
            excluded.push(s.id().to_string());
        }
    }
    MarginalLik {
        value,
        used,
        excluded,
    }
}

/// Conjugate update: `Σ | A ~ InvWishart_d(ν + n - 1, Λ + A)`.
pub fn posterior_cov(prior: &WishartPrior, sample: &GeneSample) -> Result<WishartPrior> {
    if sample.dim() != prior.dim() {
        return Err(Error::DimensionMismatch {
            expected: prior.dim(),
            found: sample.dim(),
        });
    }
    let lambda = SpdMatrix::from_symmetrized(prior.lambda().matrix() + sample.crossprod())?;
    WishartPrior::relaxed(lambda, prior.nu() + sample.n() as f64 - 1.0)
}

/// Precomputed per-gene terms for repeated likelihood evaluation while fitting.
#[derive(Debug, Clone)]
pub(crate) struct PreparedGenes {
    pub dim: usize,
    pub ns: Vec<usize>,
    pub logdet_a: Vec<f64>,
    /// Row-major `d x d` cross-products, concatenated.
    pub crossprods: Vec<f64>,
    pub excluded: Vec<String>,
}

impl PreparedGenes {
    pub fn new(samples: &[GeneSample], dim: usize) -> Result<Self> {
        let mut out = PreparedGenes {
            dim,
            ns: Vec::new(),
            logdet_a: Vec::new(),
            crossprods: Vec::new(),
            excluded: Vec::new(),
        };
        for s in samples {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            let mut buf = s.crossprod().as_slice().to_vec();
            match logdet_in_place(&mut buf, dim) {
                Ok(ld) if s.n() > dim => {
                    out.ns.push(s.n());
                    out.logdet_a.push(ld);
                    out.crossprods.extend_from_slice(s.crossprod().as_slice());
                }
                _ => out.excluded.push(s.id().to_string()),
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.ns.len()
    }
}
