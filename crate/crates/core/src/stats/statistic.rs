//! The four per-gene statistics and their F reference distributions.

use std::fmt;
use std::str::FromStr;

use super::contrast::{apply_contrast, Contrast};
use crate::dist::{f_sf, FParams};
use crate::error::{Error, Result};
use crate::matrix::{quadform, SpdMatrix};
use crate::model::{GeneSample, SimplePrior, WishartPrior};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Shrinkage Hotelling T² under the inverse-Wishart prior.
    ShHT2,
    /// Classical Hotelling T².
    HT2,
    /// Shrinkage univariate statistic under the inverse-gamma prior.
    ShUT2,
    /// Univariate statistic with a pooled scalar variance.
    UT2,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ShHT2, Method::HT2, Method::ShUT2, Method::UT2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ShHT2 => "ShHT2",
            Method::HT2 => "HT2",
            Method::ShUT2 => "ShUT2",
            Method::UT2 => "UT2",
        }
    }

    pub fn needs_prior(&self) -> bool {
        matches!(self, Method::ShHT2 | Method::ShUT2)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "").as_str() {
            "shht2" => Ok(Method::ShHT2),
            "ht2" => Ok(Method::HT2),
            "shut2" => Ok(Method::ShUT2),
            "ut2" => Ok(Method::UT2),
            _ => Err(Error::domain(format!("unknown method '{s}'"))),
        }
    }
}

/// Denominator degrees of freedom used for the classical Hotelling test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HotellingDf {
    /// `n - r`, the exact null distribution.
    #[default]
    Classical,
    /// `n - 1`, kept for reproducing published benchmark tables.
    AsPublished,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub gene_id: String,
    pub method: Method,
    pub statistic: f64,
    pub df1: f64,
    pub df2: f64,
    pub pvalue: f64,
    /// Reason the method is undefined for this gene; statistic and p-value are
    /// NaN when set.
    pub flag: Option<String>,
}

impl TestResult {
    fn from_statistic(
        gene: &str,
        method: Method,
        statistic: f64,
        df1: f64,
        df2: f64,
    ) -> Result<Self> {
        let params = FParams::central(df1, df2)?;
        Ok(TestResult {
            gene_id: gene.to_string(),
            method,
            statistic,
            df1,
            df2,
            pvalue: f_sf(statistic, &params),
            flag: None,
        })
    }

    pub fn not_applicable(gene: &str, method: Method, reason: impl Into<String>) -> Self {
        TestResult {
            gene_id: gene.to_string(),
            method,
            statistic: f64::NAN,
            df1: f64::NAN,
            df2: f64::NAN,
            pvalue: f64::NAN,
            flag: Some(reason.into()),
        }
    }

    pub fn is_applicable(&self) -> bool {
        self.flag.is_none()
    }
}

/// `((ν+n-2r-1)/r) n Ȳ'(Λ+A)^{-1}Ȳ ~ F(r, ν+n-2r-1)` for a sample and prior
/// already expressed in contrast coordinates.
pub(crate) fn sh_ht2_core(sample: &GeneSample, prior: &WishartPrior) -> Result<TestResult> {
    let r = sample.dim();
    if prior.dim() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: prior.dim(),
        });
    }
    let n = sample.n() as f64;
    let rf = r as f64;
    let df2 = prior.nu() + n - 2.0 * rf - 1.0;
    if !(df2 > 0.0) {
        return Err(Error::DegreesOfFreedom(df2));
    }
    let pooled = prior.lambda().matrix() + sample.crossprod();
    let t2 = n * quadform(sample.mean(), &pooled)?;
    TestResult::from_statistic(sample.id(), Method::ShHT2, df2 / rf * t2, rf, df2)
}

pub(crate) fn ht2_core(sample: &GeneSample, df: HotellingDf) -> Result<TestResult> {
    let r = sample.dim();
    let n = sample.n();
    if n <= r {
        return Err(Error::DegenerateGene {
            gene: sample.id().to_string(),
            reason: format!("{n} replicates for a rank-{r} hypothesis"),
        });
    }
    let a = SpdMatrix::from_symmetrized(sample.crossprod().clone()).map_err(|_| {
        Error::DegenerateGene {
            gene: sample.id().to_string(),
            reason: "singular sample covariance".into(),
        }
    })?;
    let (nf, rf) = (n as f64, r as f64);
    // n/(n-1) Ȳ'S^{-1}Ȳ = n Ȳ'A^{-1}Ȳ
    let statistic = (nf - rf) / rf * nf * a.quadform(sample.mean());
    let df2 = match df {
        HotellingDf::Classical => nf - rf,
        HotellingDf::AsPublished => nf - 1.0,
    };
    TestResult::from_statistic(sample.id(), Method::HT2, statistic, rf, df2)
}

fn scalar_residual(sample: &GeneSample) -> Result<(f64, f64, f64, f64)> {
    let r = sample.residual_sum_squares();
    let (n, d) = (sample.n() as f64, sample.dim() as f64);
    if !(r > 0.0) {
        return Err(Error::DegenerateGene {
            gene: sample.id().to_string(),
            reason: "zero residual sum of squares".into(),
        });
    }
    Ok((sample.total_sum_squares(), r, n * d, d * (n - 1.0)))
}

/// `ShHT²` for a sample in the original coordinates under `M μ = 0`.
pub fn sh_ht2(sample: &GeneSample, prior: &WishartPrior, c: &Contrast) -> Result<TestResult> {
    let (s, p) = apply_contrast(sample, Some(prior), c)?;
    sh_ht2_core(&s, &p.expect("prior was supplied"))
}

/// Classical Hotelling `T²` with `n - r` denominator degrees of freedom.
pub fn ht2(sample: &GeneSample, c: &Contrast) -> Result<TestResult> {
    ht2_with_df(sample, c, HotellingDf::Classical)
}

pub fn ht2_with_df(sample: &GeneSample, c: &Contrast, df: HotellingDf) -> Result<TestResult> {
    let (s, _) = apply_contrast(sample, None, c)?;
    ht2_core(&s, df)
}

/// `UT² = d(n-1)/(nd) Y'Y / R` referred to `F(nd, d(n-1))`.
pub fn ut2(sample: &GeneSample) -> Result<TestResult> {
    let (yy, r, df1, df2) = scalar_residual(sample)?;
    TestResult::from_statistic(sample.id(), Method::UT2, df2 / df1 * yy / r, df1, df2)
}

/// `ShUT² = (2s + d(n-1))/(nd) Y'Y / (2r + R)` referred to
/// `F(nd, 2s + d(n-1))`.
pub fn sh_ut2(sample: &GeneSample, prior: &SimplePrior) -> Result<TestResult> {
    let (n, d) = (sample.n() as f64, sample.dim() as f64);
    let (df1, m) = (n * d, d * (n - 1.0));
    let resid = sample.residual_sum_squares();
    let denom = 2.0 * prior.rate() + resid;
    if !(denom > 0.0) {
        return Err(Error::DegenerateGene {
            gene: sample.id().to_string(),
            reason: "zero residual sum of squares and zero prior rate".into(),
        });
    }
    let df2 = 2.0 * prior.shape() + m;
    let statistic = df2 / df1 * sample.total_sum_squares() / denom;
    TestResult::from_statistic(sample.id(), Method::ShUT2, statistic, df1, df2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::stats::contrast::{make_contrast, ContrastKind};

    fn sample() -> GeneSample {
        GeneSample::from_rows(
            "g",
            &[
                vec![1.0, 2.0],
                vec![3.0, 5.0],
                vec![2.0, 2.0],
                vec![0.5, 1.5],
            ],
        )
        .unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn sh_ht2_reduces_to_ht2() {
        let g = sample();
        let zero = make_contrast(ContrastKind::ZeroMeans, 2).unwrap();
        let tiny =
            WishartPrior::relaxed(SpdMatrix::identity(2).scale(1e-12).unwrap(), 3.0).unwrap();
        let sh = sh_ht2(&g, &tiny, &zero).unwrap();
        let classical = ht2(&g, &zero).unwrap();
        assert!(close(sh.statistic, classical.statistic, 1e-6));
        assert_eq!(sh.df2, classical.df2);
    }

    #[test]
    fn zero_mean_gives_unit_pvalue() {
        let g = GeneSample::from_rows("z", &[vec![1.0, -1.0], vec![-1.0, 2.0], vec![0.0, -1.0]])
            .unwrap();
        let prior = WishartPrior::new(SpdMatrix::identity(2), 6.0).unwrap();
        let zero = make_contrast(ContrastKind::ZeroMeans, 2).unwrap();
        let t = sh_ht2(&g, &prior, &zero).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.pvalue, 1.0);
        assert_eq!(ht2(&g, &zero).unwrap().statistic, 0.0);
    }

    #[test]
    fn hand_computed_sh_ht2() {
        // rows (1,2),(3,5),(2,2): Ȳ = (2,3), A = [[2,3],[3,6]], Λ = I, ν = 6
        // Λ + A = [[3,3],[3,7]], det 12, inverse [[7,-3],[-3,3]]/12
        // Ȳ'(Λ+A)^{-1}Ȳ = (28 - 36 + 27)/12 = 19/12
        // df2 = 6 + 3 - 4 - 1 = 4, statistic = 4/2 * 3 * 19/12 = 9.5
        let g =
            GeneSample::from_rows("g", &[vec![1.0, 2.0], vec![3.0, 5.0], vec![2.0, 2.0]]).unwrap();
        let prior = WishartPrior::new(SpdMatrix::identity(2), 6.0).unwrap();
        let zero = make_contrast(ContrastKind::ZeroMeans, 2).unwrap();
        let t = sh_ht2(&g, &prior, &zero).unwrap();
        assert!(close(t.statistic, 9.5, 1e-13));
        assert_eq!((t.df1, t.df2), (2.0, 4.0));
        // F(2,4) upper tail: (1 + 2x/4)^{-2}
        assert!(close(t.pvalue, (1.0f64 + 9.5 / 2.0).powi(-2), 1e-12));
    }

    #[test]
    fn ht2_scalar_case_is_squared_t() {
        let g = GeneSample::from_rows("t", &[vec![1.0], vec![2.5], vec![0.5], vec![3.0]]).unwrap();
        let zero = make_contrast(ContrastKind::ZeroMeans, 1).unwrap();
        let t = ht2(&g, &zero).unwrap();
        let n = 4.0;
        let mean = 7.0 / 4.0;
        let s2 = [1.0f64, 2.5, 0.5, 3.0]
            .iter()
            .map(|y| (y - mean).powi(2))
            .sum::<f64>()
            / 3.0;
        assert!(close(t.statistic, n * mean * mean / s2, 1e-13));
        assert_eq!((t.df1, t.df2), (1.0, 3.0));
    }

    #[test]
    fn ht2_df_conventions() {
        let g = sample();
        let zero = make_contrast(ContrastKind::ZeroMeans, 2).unwrap();
        assert_eq!(ht2(&g, &zero).unwrap().df2, 2.0);
        assert_eq!(
            ht2_with_df(&g, &zero, HotellingDf::AsPublished)
                .unwrap()
                .df2,
            3.0
        );
    }

    #[test]
    fn ht2_needs_replicates() {
        let g = GeneSample::from_rows("few", &[vec![1.0, 2.0], vec![3.0, 5.0]]).unwrap();
        let zero = make_contrast(ContrastKind::ZeroMeans, 2).unwrap();
        assert!(matches!(ht2(&g, &zero), Err(Error::DegenerateGene { .. })));
    }

    #[test]
    fn ut2_edge_cases() {
        let flat = GeneSample::from_rows("c", &[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(ut2(&flat), Err(Error::DegenerateGene { .. })));
        // zero in-sample means: Y'Y = R
        let centred = GeneSample::from_rows("m", &[vec![1.0, -2.0], vec![-1.0, 2.0]]).unwrap();
        let t = ut2(&centred).unwrap();
        assert!(close(t.statistic, 2.0 * 1.0 / (2.0 * 2.0), 1e-15));
        assert_eq!((t.df1, t.df2), (4.0, 2.0));
    }

    #[test]
    fn sh_ut2_limit_is_ut2() {
        let g = sample();
        let zero_prior = SimplePrior::relaxed(0.0, 0.0).unwrap();
        let a = sh_ut2(&g, &zero_prior).unwrap();
        let b = ut2(&g).unwrap();
        assert_eq!(a.statistic, b.statistic);
        assert_eq!((a.df1, a.df2), (b.df1, b.df2));
        let zeros = GeneSample::from_rows("0", &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let p = SimplePrior::new(1.0, 2.0).unwrap();
        assert_eq!(sh_ut2(&zeros, &p).unwrap().statistic, 0.0);
    }

    #[test]
    fn equal_means_ignores_common_shift() {
        let g = sample();
        let shifted = GeneSample::new(
            "g",
            Matrix::from_rows(
                &(0..g.n())
                    .map(|i| g.obs().row(i).iter().map(|y| y + 4.0).collect())
                    .collect::<Vec<_>>(),
            )
            .unwrap(),
        )
        .unwrap();
        let prior = WishartPrior::new(SpdMatrix::identity(2), 7.0).unwrap();
        let c = make_contrast(ContrastKind::EqualMeans, 2).unwrap();
        let a = sh_ht2(&g, &prior, &c).unwrap();
        let b = sh_ht2(&shifted, &prior, &c).unwrap();
        assert!(close(a.statistic, b.statistic, 1e-12));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert_eq!("sh_ht2".parse::<Method>().unwrap(), Method::ShHT2);
    }
}
