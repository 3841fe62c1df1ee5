//! Maximum-likelihood estimation of the prior hyperparameters from the
//! per-gene cross-product matrices.

use rayon::prelude::*;

use super::marginal::{residual_scalar, PreparedGenes};
use super::optim::{self, Settings};
use super::prior::{Prior, SimplePrior, WishartPrior};
use super::sample::GeneSample;
use crate::dist::{ln_gamma, ln_multigamma};
use crate::error::{Error, Result};
use crate::matrix::{logdet_in_place, Matrix, SpdMatrix};

/// Smallest admissible `ν - 2d` reachable by the parameterization.
pub const NU_FLOOR_MARGIN: f64 = 1e-6;

const CHUNK: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Relative log-likelihood change for convergence.
    pub rel_tol: f64,
    /// Infinity norm of the last parameter step for convergence.
    pub step_tol: f64,
    /// Infinity norm of the per-gene mean log-likelihood gradient.
    pub grad_tol: f64,
    pub min_genes: usize,
    /// Relative central-difference step.
    pub fd_step: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: 500,
            rel_tol: 1e-9,
            step_tol: 1e-7,
            grad_tol: 1e-5,
            min_genes: 50,
            fd_step: 1e-5,
        }
    }
}

impl FitConfig {
    fn settings(&self) -> Settings {
        Settings {
            max_iter: self.max_iter,
            rel_tol: self.rel_tol,
            step_tol: self.step_tol,
            grad_tol: self.grad_tol,
            fd_step: self.fd_step,
            simplex_step: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub prior: Prior,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
    pub genes_used: usize,
    pub excluded: Vec<String>,
}

/// Unconstrained coordinates: lower Cholesky factor of `Λ` with log diagonal,
/// then `t` with `ν = 2d + NU_FLOOR_MARGIN + exp(t)`.
fn decode(theta: &[f64], d: usize) -> (Vec<f64>, f64) {
    let mut l = vec![0.0; d * d];
    let mut k = 0;
    for i in 0..d {
        for j in 0..=i {
            l[i * d + j] = if i == j { theta[k].exp() } else { theta[k] };
            k += 1;
        }
    }
    let mut lambda = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            lambda[i * d + j] = (0..=i.min(j)).map(|m| l[i * d + m] * l[j * d + m]).sum();
        }
    }
    let nu = 2.0 * d as f64 + NU_FLOOR_MARGIN + theta[k].exp();
    (lambda, nu)
}

fn encode(lambda: &SpdMatrix, nu: f64) -> Vec<f64> {
    let d = lambda.dim();
    let l = lambda.cholesky().matrix();
    let mut theta = Vec::with_capacity(d * (d + 1) / 2 + 1);
    for i in 0..d {
        for j in 0..=i {
            theta.push(if i == j { l[(i, j)].ln() } else { l[(i, j)] });
        }
    }
    theta.push((nu - 2.0 * d as f64 - NU_FLOOR_MARGIN).max(1e-300).ln());
    theta
}

/// Total log-likelihood of the prepared genes at `(Λ, ν)` (row-major `Λ`).
/// Chunks are summed in index order so the result does not depend on the
/// thread schedule.
fn wishart_objective(genes: &PreparedGenes, lambda: &[f64], nu: f64) -> f64 {
    let d = genes.dim;
    let df = d as f64;
    let mut lam = lambda.to_vec();
    let Ok(logdet_lambda) = logdet_in_place(&mut lam, d) else {
        return f64::NEG_INFINITY;
    };
    let Ok(prior_norm) = ln_multigamma(d, (nu - df - 1.0) / 2.0) else {
        return f64::NEG_INFINITY;
    };

    let partials: Vec<f64> = (0..genes.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|idx| {
            let mut buf = vec![0.0; d * d];
            let mut cached: Option<(usize, f64)> = None;
            let mut acc = 0.0;
            for &g in idx {
                let n = genes.ns[g];
                let nf = n as f64;
                let a = &genes.crossprods[g * d * d..(g + 1) * d * d];
                for ((b, l), x) in buf.iter_mut().zip(lambda).zip(a) {
                    *b = l + x;
                }
                let Ok(logdet_sum) = logdet_in_place(&mut buf, d) else {
                    return f64::NEG_INFINITY;
                };
                let gamma_terms = match cached {
                    Some((cn, v)) if cn == n => v,
                    _ => {
                        let v = ln_multigamma(d, (nu + nf - df - 2.0) / 2.0).unwrap_or(f64::NAN)
                            - ln_multigamma(d, (nf - 1.0) / 2.0).unwrap_or(f64::NAN);
                        cached = Some((n, v));
                        v
                    }
                };
                acc += gamma_terms + 0.5 * (nf - df - 2.0) * genes.logdet_a[g]
                    - 0.5 * (nu + nf - df - 2.0) * logdet_sum;
            }
            acc
        })
        .collect();
    let per_gene_const = -prior_norm + 0.5 * (nu - df - 1.0) * logdet_lambda;
    partials.iter().sum::<f64>() + genes.len() as f64 * per_gene_const
}

/// Fits `(Λ, ν)` by maximizing the marginal likelihood of the cross-product
/// matrices. Genes with singular `A_g` are excluded from the fit.
pub fn fit_wishart_prior(samples: &[GeneSample], config: &FitConfig) -> Result<FitReport> {
    let d = samples.first().map_or(0, GeneSample::dim);
    let genes = PreparedGenes::new(samples, d)?;
    if genes.len() < config.min_genes.max(1) {
        return Err(Error::TooFewGenes {
            found: genes.len(),
            required: config.min_genes.max(1),
        });
    }

    // moment start: Λ0 = (ν0 - 2d - 2) mean(S_g), ν0 = 2d + 4
    let nu0 = 2.0 * d as f64 + 4.0;
    let mut mean_s = Matrix::zeros(d, d);
    for g in 0..genes.len() {
        let a =
            Matrix::from_row_major(d, d, genes.crossprods[g * d * d..(g + 1) * d * d].to_vec())?;
        mean_s = &mean_s + &a.scale(1.0 / (genes.ns[g] as f64 - 1.0));
    }
    let lambda0 = SpdMatrix::from_symmetrized(
        mean_s.scale((nu0 - 2.0 * d as f64 - 2.0) / genes.len() as f64),
    )?;
    let x0 = encode(&lambda0, nu0);

    let count = genes.len() as f64;
    let objective = |theta: &[f64]| {
        let (lambda, nu) = decode(theta, d);
        let ll = wishart_objective(&genes, &lambda, nu);
        if ll.is_finite() {
            -ll / count
        } else {
            f64::INFINITY
        }
    };
    let out = optim::minimize(&objective, &x0, &config.settings());
    let (lambda, nu) = decode(&out.x, d);
    let lambda = SpdMatrix::from_symmetrized(Matrix::from_row_major(d, d, lambda)?)?;
    Ok(FitReport {
        prior: Prior::Wishart(WishartPrior::new(lambda, nu)?),
        loglik: -out.f * count,
        iterations: out.iterations,
        converged: out.converged,
        grad_norm: out.grad_norm,
        genes_used: genes.len(),
        excluded: genes.excluded,
    })
}

/// Fits the inverse-gamma `(r, s)` from the residual scalars
/// `R_g = trace(A_g)` with `d(n_g - 1)` degrees of freedom.
pub fn fit_simple_prior(samples: &[GeneSample], config: &FitConfig) -> Result<FitReport> {
    let mut resid = Vec::new();
    let mut excluded = Vec::new();
    for s in samples {
        let (r, m) = residual_scalar(s);
        if r > 0.0 && r.is_finite() {
            resid.push((r, m));
        } else {
            excluded.push(s.id().to_string());
        }
    }
    if resid.len() < config.min_genes.max(1) {
        return Err(Error::TooFewGenes {
            found: resid.len(),
            required: config.min_genes.max(1),
        });
    }
    let count = resid.len() as f64;
    let mean_var = resid.iter().map(|(r, m)| r / m).sum::<f64>() / count;
    // s0 = 2 so E[σ²] = r / (s - 1) = r0 matches the average variance
    let x0 = [mean_var.ln(), 2f64.ln()];

    let objective = |theta: &[f64]| {
        let (rate, s) = (theta[0].exp(), theta[1].exp());
        if !(rate > 0.0 && s > 0.0 && rate.is_finite() && s.is_finite()) {
            return f64::INFINITY;
        }
        let ln2r = (2.0 * rate).ln();
        let lg_s = ln_gamma(s);
        let total: f64 = resid
            .iter()
            .map(|&(r, m)| {
                ln_gamma(s + m / 2.0) - lg_s - ln_gamma(m / 2.0)
                    + s * ln2r
                    + (m / 2.0 - 1.0) * r.ln()
                    - (s + m / 2.0) * (2.0 * rate + r).ln()
            })
            .sum();
        -total / count
    };
    let out = optim::minimize(&objective, &x0, &config.settings());
    let prior = SimplePrior::new(out.x[0].exp(), out.x[1].exp())?;
    Ok(FitReport {
        prior: Prior::Simple(prior),
        loglik: -out.f * count,
        iterations: out.iterations,
        converged: out.converged,
        grad_norm: out.grad_norm,
        genes_used: resid.len(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::marginal::marginal_loglik;

    #[test]
    fn encode_decode_roundtrip() {
        let lambda =
            SpdMatrix::new(Matrix::from_row_major(2, 2, vec![2.0, 0.6, 0.6, 1.5]).unwrap())
                .unwrap();
        let (l, nu) = decode(&encode(&lambda, 7.3), 2);
        for (a, b) in l.iter().zip(lambda.matrix().as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((nu - 7.3).abs() < 1e-12);
    }

    #[test]
    fn objective_matches_reference_loglik() {
        let prior = WishartPrior::new(
            SpdMatrix::new(Matrix::from_row_major(2, 2, vec![2.0, 0.3, 0.3, 1.0]).unwrap())
                .unwrap(),
            7.5,
        )
        .unwrap();
        let samples: Vec<GeneSample> = (0..40)
            .map(|g| {
                let x = g as f64;
                GeneSample::from_rows(
                    format!("g{g}"),
                    &[
                        vec![x.sin(), (2.0 * x).cos()],
                        vec![(x + 1.0).cos(), 0.3 * x.sin()],
                        vec![0.1 * x, (x * 0.7).sin()],
                        vec![-0.2, (x * 1.3).cos()],
                    ],
                )
                .unwrap()
            })
            .collect();
        let reference = marginal_loglik(&prior, &samples).unwrap().value;
        let genes = PreparedGenes::new(&samples, 2).unwrap();
        let fast = wishart_objective(&genes, prior.lambda().matrix().as_slice(), prior.nu());
        assert!((fast - reference).abs() < 1e-9 * reference.abs());
    }

    #[test]
    fn too_few_genes() {
        let g =
            GeneSample::from_rows("g", &[vec![1.0, 2.0], vec![3.0, 5.0], vec![2.0, 2.0]]).unwrap();
        let cfg = FitConfig::default();
        assert!(matches!(
            fit_wishart_prior(&vec![g.clone(); 10], &cfg),
            Err(Error::TooFewGenes {
                found: 10,
                required: 50
            })
        ));
        assert!(matches!(
            fit_simple_prior(&vec![g; 3], &cfg),
            Err(Error::TooFewGenes { .. })
        ));
    }
}
