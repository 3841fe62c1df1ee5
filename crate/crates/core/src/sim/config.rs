//! Description of one simulation experiment and its flat-file form.

use std::path::Path;

use crate::dataio::kv::{fmt_f64, fmt_list, KvFile};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, SpdMatrix};
use crate::model::{FitConfig, WishartPrior};
use crate::stats::HotellingDf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// Every covariance from one inverse-Wishart prior.
    Model,
    /// Covariances from a two-component inverse-Wishart mixture sharing `Λ`.
    Mixture,
}

impl Generator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Generator::Model => "model",
            Generator::Mixture => "mixture",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "model" | "inv_wishart" => Ok(Generator::Model),
            "mixture" | "mixed_inv_wishart" => Ok(Generator::Mixture),
            _ => Err(Error::domain(format!("unknown generator '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixture {
    /// Probability of the first component.
    pub f: f64,
    pub nu1: f64,
    pub nu2: f64,
}

/// How large the designated genes' mean shift is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Effect {
    /// Solve the noncentral-F power equation for the multiplier.
    PowerEquation { power: f64, alpha: f64 },
    /// Use the given multiplier of the average standard deviation directly.
    Theta(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub genes: usize,
    pub dim: usize,
    pub replicates: usize,
    pub true_positives: usize,
    pub effect: Effect,
    pub generator: Generator,
    pub prior: WishartPrior,
    pub mixture: Option<Mixture>,
    pub fdr_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub hotelling_df: HotellingDf,
    pub fit: FitConfig,
}

pub const PAPER_MIXTURE: Mixture = Mixture {
    f: 0.2,
    nu1: 18.4067,
    nu2: 6.77542,
};

/// Off-diagonal correlation of the surrogate prior mean.
pub const SURROGATE_CORRELATION: f64 = 0.3;

/// The shape `ν` whose prior-mean scale `1/(ν-2d-2)` equals the mixture
/// average `f/(ν1-2d-2) + (1-f)/(ν2-2d-2)`.
pub fn moment_matched_nu(m: &Mixture, d: usize) -> Result<f64> {
    let floor = 2.0 * d as f64 + 2.0;
    if !(m.nu1 > floor && m.nu2 > floor) {
        return Err(Error::domain(format!(
            "mixture shapes must exceed 2d + 2 = {floor} for a finite mean"
        )));
    }
    if !(0.0..=1.0).contains(&m.f) {
        return Err(Error::domain(format!(
            "mixture weight must lie in [0, 1], got {}",
            m.f
        )));
    }
    let inv = m.f / (m.nu1 - floor) + (1.0 - m.f) / (m.nu2 - floor);
    Ok(floor + 1.0 / inv)
}

/// Surrogate prior: `ν` moment-matched to the mixture, `Λ` chosen so the
/// prior mean covariance has unit variances and correlation `rho`.
pub fn surrogate_prior(d: usize, rho: f64, m: &Mixture) -> Result<WishartPrior> {
    let nu = moment_matched_nu(m, d)?;
    let mut c = Matrix::identity(d);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                c[(i, j)] = rho;
            }
        }
    }
    let lambda = SpdMatrix::new(c.scale(nu - 2.0 * d as f64 - 2.0))?;
    WishartPrior::new(lambda, nu)
}

const KEYS: &[&str] = &[
    "genes",
    "dim",
    "replicates",
    "true_positives",
    "effect",
    "theta",
    "power",
    "alpha",
    "generator",
    "prior.nu",
    "prior.lambda",
    "mixture.f",
    "mixture.nu1",
    "mixture.nu2",
    "fdr_grid",
    "reps",
    "seed",
    "hotelling_df",
    "fit.max_iter",
    "fit.rel_tol",
    "fit.step_tol",
    "fit.grad_tol",
    "fit.min_genes",
];

impl SimConfig {
    /// Two conditions, three replicates, 12625 genes of which 100 carry a
    /// mean shift of 7.5 average standard deviations; covariances from the
    /// surrogate prior.
    pub fn paper_model() -> Self {
        let d = 2;
        SimConfig {
            genes: 12625,
            dim: d,
            replicates: 3,
            true_positives: 100,
            effect: Effect::Theta(7.5),
            generator: Generator::Model,
            prior: surrogate_prior(d, SURROGATE_CORRELATION, &PAPER_MIXTURE)
                .expect("valid surrogate"),
            mixture: None,
            fdr_grid: vec![0.05, 0.10, 0.15, 0.20, 0.25],
            reps: 100,
            seed: 20040101,
            hotelling_df: HotellingDf::AsPublished,
            fit: FitConfig::default(),
        }
    }

    /// As [`SimConfig::paper_model`] with covariances from the mixture.
    pub fn paper_mixture() -> Self {
        SimConfig {
            generator: Generator::Mixture,
            mixture: Some(PAPER_MIXTURE),
            ..Self::paper_model()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.replicates < 2 {
            return Err(Error::domain("need d >= 1 and at least 2 replicates"));
        }
        if self.true_positives > self.genes {
            return Err(Error::domain(format!(
                "true positives ({}) exceed genes ({})",
                self.true_positives, self.genes
            )));
        }
        if self.genes > u32::MAX as usize || self.reps > u32::MAX as usize {
            return Err(Error::domain(
                "gene and replicate counts must fit in 32 bits",
            ));
        }
        if self.prior.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.prior.dim(),
            });
        }
        if !self.prior.is_proper() {
            return Err(Error::domain("simulation prior must satisfy nu > 2d"));
        }
        match (self.generator, &self.mixture) {
            (Generator::Model, None) => {}
            (Generator::Mixture, Some(m)) => {
                let floor = 2.0 * self.dim as f64;
                if !(m.nu1 > floor && m.nu2 > floor && (0.0..=1.0).contains(&m.f)) {
                    return Err(Error::domain("mixture needs nu1, nu2 > 2d and f in [0, 1]"));
                }
            }
            _ => {
                return Err(Error::domain(
                    "mixture parameters are given iff the generator is 'mixture'",
                ))
            }
        }
        if self.fdr_grid.is_empty() || self.fdr_grid.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::domain("fdr grid values must lie in (0, 1)"));
        }
        match self.effect {
            Effect::Theta(t) if !(t >= 0.0 && t.is_finite()) => Err(Error::domain(format!(
                "theta must be finite and >= 0, got {t}"
            ))),
            Effect::PowerEquation { power, alpha }
                if !(power > 0.0 && power < 1.0 && alpha > 0.0 && alpha < 1.0) =>
            {
                Err(Error::domain("power and alpha must lie in (0, 1)"))
            }
            _ => Ok(()),
        }
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        put("genes", self.genes.to_string());
        put("dim", self.dim.to_string());
        put("replicates", self.replicates.to_string());
        put("true_positives", self.true_positives.to_string());
        match self.effect {
            Effect::Theta(t) => {
                put("effect", "theta".into());
                put("theta", fmt_f64(t));
            }
            Effect::PowerEquation { power, alpha } => {
                put("effect", "power".into());
                put("power", fmt_f64(power));
                put("alpha", fmt_f64(alpha));
            }
        }
        put("generator", self.generator.as_str().into());
        put("prior.nu", fmt_f64(self.prior.nu()));
        put(
            "prior.lambda",
            fmt_list(self.prior.lambda().matrix().as_slice()),
        );
        if let Some(m) = &self.mixture {
            put("mixture.f", fmt_f64(m.f));
            put("mixture.nu1", fmt_f64(m.nu1));
            put("mixture.nu2", fmt_f64(m.nu2));
        }
        put("fdr_grid", fmt_list(&self.fdr_grid));
        put("reps", self.reps.to_string());
        put("seed", self.seed.to_string());
        put(
            "hotelling_df",
            match self.hotelling_df {
                HotellingDf::Classical => "classical",
                HotellingDf::AsPublished => "published",
            }
            .into(),
        );
        put("fit.max_iter", self.fit.max_iter.to_string());
        put("fit.rel_tol", fmt_f64(self.fit.rel_tol));
        put("fit.step_tol", fmt_f64(self.fit.step_tol));
        put("fit.grad_tol", fmt_f64(self.fit.grad_tol));
        put("fit.min_genes", self.fit.min_genes.to_string());
        out
    }

    /// Applies the keys present in `kv` on top of `self`. The generator key
    /// switches to the matching preset mixture when none is given.
    pub fn overlay(mut self, kv: &KvFile) -> Result<Self> {
        let unknown = kv.unknown_keys(KEYS);
        if let Some(k) = unknown.first() {
            return Err(Error::Parse {
                path: kv.path.clone(),
                line: kv.entry(k).map_or(0, |e| e.line),
                column: 1,
                message: format!("unknown key '{k}'"),
            });
        }
        if let Some(v) = kv.parsed("genes")? {
            self.genes = v;
        }
        if let Some(v) = kv.parsed("replicates")? {
            self.replicates = v;
        }
        if let Some(v) = kv.parsed("true_positives")? {
            self.true_positives = v;
        }
        if let Some(v) = kv.parsed("reps")? {
            self.reps = v;
        }
        if let Some(v) = kv.parsed("seed")? {
            self.seed = v;
        }
        match kv.get("effect") {
            None => {
                if let Some(t) = kv.parsed("theta")? {
                    self.effect = Effect::Theta(t);
                }
            }
            Some("theta") => self.effect = Effect::Theta(kv.required("theta")?),
            Some("power") => {
                self.effect = Effect::PowerEquation {
                    power: kv.required("power")?,
                    alpha: kv.required("alpha")?,
                }
            }
            Some(other) => return Err(Error::domain(format!("unknown effect '{other}'"))),
        }
        if let Some(g) = kv.get("generator") {
            self.generator = Generator::parse(g)?;
            self.mixture = match self.generator {
                Generator::Model => None,
                Generator::Mixture => self.mixture.or(Some(PAPER_MIXTURE)),
            };
        }
        if self.generator == Generator::Mixture {
            let mut m = self.mixture.unwrap_or(PAPER_MIXTURE);
            if let Some(v) = kv.parsed("mixture.f")? {
                m.f = v;
            }
            if let Some(v) = kv.parsed("mixture.nu1")? {
                m.nu1 = v;
            }
            if let Some(v) = kv.parsed("mixture.nu2")? {
                m.nu2 = v;
            }
            self.mixture = Some(m);
        }
        let dim = kv.parsed("dim")?.unwrap_or(self.dim);
        let nu = kv.parsed("prior.nu")?;
        let lambda = kv.list("prior.lambda")?;
        if dim != self.dim || nu.is_some() || lambda.is_some() {
            let base = if dim != self.dim {
                surrogate_prior(dim, SURROGATE_CORRELATION, &PAPER_MIXTURE)?
            } else {
                self.prior.clone()
            };
            let lambda = match lambda {
                Some(v) => SpdMatrix::new(Matrix::from_row_major(dim, dim, v)?)?,
                None => base.lambda().clone(),
            };
            self.prior = WishartPrior::new(lambda, nu.unwrap_or(base.nu()))?;
            self.dim = dim;
        }
        if let Some(v) = kv.list("fdr_grid")? {
            self.fdr_grid = v;
        }
        if let Some(v) = kv.get("hotelling_df") {
            self.hotelling_df = match v {
                "classical" => HotellingDf::Classical,
                "published" => HotellingDf::AsPublished,
                other => return Err(Error::domain(format!("unknown hotelling_df '{other}'"))),
            };
        }
        if let Some(v) = kv.parsed("fit.max_iter")? {
            self.fit.max_iter = v;
        }
        if let Some(v) = kv.parsed("fit.rel_tol")? {
            self.fit.rel_tol = v;
        }
        if let Some(v) = kv.parsed("fit.step_tol")? {
            self.fit.step_tol = v;
        }
        if let Some(v) = kv.parsed("fit.grad_tol")? {
            self.fit.grad_tol = v;
        }
        if let Some(v) = kv.parsed("fit.min_genes")? {
            self.fit.min_genes = v;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        Self::paper_model().overlay(&KvFile::parse(text, Path::new("<config>"))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_matching_reproduces_the_mixture_mean() {
        let d = 2;
        let nu = moment_matched_nu(&PAPER_MIXTURE, d).unwrap();
        let lhs = 1.0 / (nu - 6.0);
        let rhs = 0.2 / (18.4067 - 6.0) + 0.8 / (6.77542 - 6.0);
        assert!((lhs - rhs).abs() < 1e-14);
        let single = Mixture {
            f: 1.0,
            nu1: 9.0,
            nu2: 30.0,
        };
        assert!((moment_matched_nu(&single, d).unwrap() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn surrogate_mean_is_unit_variance() {
        let p = surrogate_prior(2, 0.3, &PAPER_MIXTURE).unwrap();
        let mean = p.mean_covariance().unwrap();
        assert!((mean[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((mean[(0, 1)] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn kv_round_trip() {
        for cfg in [SimConfig::paper_model(), SimConfig::paper_mixture()] {
            let back = SimConfig::from_kv_text(&cfg.to_kv()).unwrap();
            assert_eq!(back, cfg);
        }
        let mut cfg = SimConfig::paper_model();
        cfg.effect = Effect::PowerEquation {
            power: 0.9,
            alpha: 0.0026,
        };
        assert_eq!(SimConfig::from_kv_text(&cfg.to_kv()).unwrap(), cfg);
    }

    #[test]
    fn overrides_and_rejections() {
        let cfg = SimConfig::from_kv_text("genes=500\nreps=2\ngenerator=mixture\n").unwrap();
        assert_eq!(cfg.genes, 500);
        assert_eq!(cfg.mixture, Some(PAPER_MIXTURE));
        assert!(SimConfig::from_kv_text("genez=5\n").is_err());
        assert!(SimConfig::from_kv_text("true_positives=20000\n").is_err());
        assert!(SimConfig::from_kv_text("fdr_grid=0.1,1.5\n").is_err());
    }
}
