//! Synthetic datasets from the normal / inverse-Wishart model and its
//! two-component mixture.

use rayon::prelude::*;

use super::config::{Effect, Generator, SimConfig};
use super::power::{designate_means, solve_theta};
use crate::dist::{sample_mvnormal, InvWishartSampler, RngStream};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::GeneSample;

#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    pub samples: Vec<GeneSample>,
    /// `truth[g]` marks a gene with a non-zero mean.
    pub truth: Vec<bool>,
}

impl SimDataset {
    pub fn truth_ids(&self) -> std::collections::HashSet<String> {
        self.samples
            .iter()
            .zip(&self.truth)
            .filter(|(_, &t)| t)
            .map(|(s, _)| s.id().to_string())
            .collect()
    }
}

pub fn gene_id(g: usize) -> String {
    format!("g{g:05}")
}

/// The effect multiplier `θ` the config asks for. The power equation uses
/// the `(nd, d(n-1))` reference distribution with noncentrality `n θ`.
pub fn effect_theta(config: &SimConfig) -> Result<f64> {
    match config.effect {
        Effect::Theta(t) => Ok(t),
        Effect::PowerEquation { power, alpha } => {
            let (n, d) = (config.replicates as f64, config.dim as f64);
            solve_theta(power, alpha, n * d, d * (n - 1.0), n)
        }
    }
}

fn generate(
    config: &SimConfig,
    replicate: u32,
    samplers: &[(f64, InvWishartSampler)],
) -> Result<SimDataset> {
    let theta = effect_theta(config)?;
    let shifted = designate_means(&config.prior, theta, config.dim)?;
    let zero = vec![0.0; config.dim];
    let (n, d) = (config.replicates, config.dim);
    let samples = (0..config.genes)
        .into_par_iter()
        .map(|g| {
            let mut rng = RngStream::for_item(config.seed, replicate, g as u32);
            let sampler = if samplers.len() == 1 || samplers[0].0 >= 1.0 {
                &samplers[0].1
            } else if samplers[0].0 <= 0.0 {
                &samplers[1].1
            } else {
                // first component with probability samplers[0].0
                let u = rng.uniform();
                if u < samplers[0].0 {
                    &samplers[0].1
                } else {
                    &samplers[1].1
                }
            };
            let sigma = sampler.sample(&mut rng)?;
            let mean = if g < config.true_positives {
                &shifted
            } else {
                &zero
            };
            let mut data = Vec::with_capacity(n * d);
            for _ in 0..n {
                data.extend(sample_mvnormal(&mut rng, mean, &sigma)?);
            }
            GeneSample::new(gene_id(g), Matrix::from_row_major(n, d, data)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = (0..config.genes)
        .map(|g| g < config.true_positives)
        .collect();
    Ok(SimDataset { samples, truth })
}

/// One dataset with every covariance drawn from the configured prior.
pub fn gen_model_dataset(config: &SimConfig, replicate: u32) -> Result<SimDataset> {
    config.validate()?;
    if config.generator != Generator::Model {
        return Err(Error::domain(
            "gen_model_dataset needs the 'model' generator",
        ));
    }
    let sampler = InvWishartSampler::new(config.prior.nu(), config.prior.lambda())?;
    generate(config, replicate, &[(1.0, sampler)])
}

/// One dataset with covariances from the mixture
/// `f InvWishart(ν1, Λ) + (1-f) InvWishart(ν2, Λ)`.
pub fn gen_mixture_dataset(config: &SimConfig, replicate: u32) -> Result<SimDataset> {
    config.validate()?;
    let Some(m) = config
        .mixture
        .filter(|_| config.generator == Generator::Mixture)
    else {
        return Err(Error::domain(
            "gen_mixture_dataset needs the 'mixture' generator",
        ));
    };
    let lambda = config.prior.lambda();
    let first = InvWishartSampler::new(m.nu1, lambda)?;
    let second = InvWishartSampler::new(m.nu2, lambda)?;
    generate(config, replicate, &[(m.f, first), (1.0 - m.f, second)])
}

pub fn gen_dataset(config: &SimConfig, replicate: u32) -> Result<SimDataset> {
    match config.generator {
        Generator::Model => gen_model_dataset(config, replicate),
        Generator::Mixture => gen_mixture_dataset(config, replicate),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(generator: Generator) -> SimConfig {
        let base = match generator {
            Generator::Model => SimConfig::paper_model(),
            Generator::Mixture => SimConfig::paper_mixture(),
        };
        SimConfig {
            genes: 300,
            true_positives: 10,
            ..base
        }
    }

    #[test]
    fn truth_geometry() {
        let ds = gen_model_dataset(&small(Generator::Model), 0).unwrap();
        assert_eq!(ds.samples.len(), 300);
        assert_eq!(ds.truth.iter().filter(|&&t| t).count(), 10);
        assert_eq!(ds.truth_ids().len(), 10);
        assert!(ds.samples.iter().all(|s| s.n() == 3 && s.dim() == 2));
    }

    #[test]
    fn deterministic_and_replicate_dependent() {
        let cfg = small(Generator::Mixture);
        let a = gen_mixture_dataset(&cfg, 1).unwrap();
        let b = gen_mixture_dataset(&cfg, 1).unwrap();
        let c = gen_mixture_dataset(&cfg, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples[0], c.samples[0]);
    }

    #[test]
    fn generator_mismatch() {
        assert!(gen_mixture_dataset(&small(Generator::Model), 0).is_err());
        assert!(gen_model_dataset(&small(Generator::Mixture), 0).is_err());
    }

    #[test]
    fn unit_mixture_weight_is_the_model() {
        let mut mix = small(Generator::Mixture);
        let m = mix.mixture.as_mut().unwrap();
        m.f = 1.0;
        m.nu1 = mix.prior.nu();
        let a = gen_mixture_dataset(&mix, 0).unwrap();
        let b = gen_model_dataset(&small(Generator::Model), 0).unwrap();
        assert_eq!(a, b);
    }
}
