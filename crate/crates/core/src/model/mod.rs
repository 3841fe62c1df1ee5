//! Empirical-Bayes prior models for per-gene covariance matrices.

mod fit;
mod marginal;
mod optim;
mod prior;
mod sample;

pub use fit::{fit_simple_prior, fit_wishart_prior, FitConfig, FitReport, NU_FLOOR_MARGIN};
pub use marginal::{
    gene_log_marginal, marginal_loglik, posterior_cov, residual_scalar, simple_log_marginal,
    simple_marginal_loglik, MarginalLik,
};
pub use prior::{Prior, SimplePrior, WishartPrior};
pub use sample::GeneSample;
