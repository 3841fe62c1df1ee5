//! Whole-dataset testing: every gene is mapped into contrast coordinates and
//! scored independently.

use rayon::prelude::*;

use super::contrast::Contrast;
use super::statistic::{ht2_core, sh_ht2_core, sh_ut2, ut2, HotellingDf, Method, TestResult};
use crate::error::{Error, Result};
use crate::model::{GeneSample, Prior};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TestOptions {
    pub hotelling_df: HotellingDf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub gene_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestRun {
    /// One result per input gene, in input order.
    pub results: Vec<TestResult>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Samples expressed in an orthonormal basis of the contrast's row space.
/// Priors used by [`run_tests`] are fitted on these.
pub fn contrast_space(samples: &[GeneSample], c: &Contrast) -> Result<Vec<GeneSample>> {
    let basis = c.orthonormalized()?;
    samples
        .par_iter()
        .map(|s| {
            if s.dim() != c.dim() {
                return Err(Error::DimensionMismatch {
                    expected: c.dim(),
                    found: s.dim(),
                });
            }
            s.transform(basis.matrix())
        })
        .collect()
}

/// Scores every gene with `method` under the hypothesis `c`. The prior, when
/// required, must have been fitted on [`contrast_space`] samples so its
/// dimension equals the contrast rank.
pub fn run_tests(
    samples: &[GeneSample],
    method: Method,
    c: &Contrast,
    prior: Option<&Prior>,
    options: &TestOptions,
) -> Result<TestRun> {
    if method.needs_prior() {
        let ok = match (method, prior) {
            (Method::ShHT2, Some(Prior::Wishart(p))) => {
                if p.dim() != c.rank() {
                    return Err(Error::DimensionMismatch {
                        expected: c.rank(),
                        found: p.dim(),
                    });
                }
                true
            }
            (Method::ShUT2, Some(Prior::Simple(_))) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::domain(format!(
                "{method} needs a matching fitted prior"
            )));
        }
    }
    let transformed = contrast_space(samples, c)?;
    let results: Vec<TestResult> = transformed
        .par_iter()
        .map(|s| {
            let outcome = match (method, prior) {
                (Method::ShHT2, Some(Prior::Wishart(p))) => sh_ht2_core(s, p),
                (Method::ShUT2, Some(Prior::Simple(p))) => sh_ut2(s, p),
                (Method::HT2, _) => ht2_core(s, options.hotelling_df),
                (Method::UT2, _) => ut2(s),
                _ => unreachable!("prior checked above"),
            };
            outcome.unwrap_or_else(|e| TestResult::not_applicable(s.id(), method, e.to_string()))
        })
        .collect();
    let diagnostics = results
        .iter()
        .filter_map(|r| {
            r.flag.as_ref().map(|m| Diagnostic {
                gene_id: r.gene_id.clone(),
                message: m.clone(),
            })
        })
        .collect();
    Ok(TestRun {
        results,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SpdMatrix;
    use crate::model::WishartPrior;
    use crate::stats::contrast::{make_contrast, ContrastKind};

    fn genes() -> Vec<GeneSample> {
        (0..6)
            .map(|g| {
                let x = g as f64;
                GeneSample::from_rows(
                    format!("g{g}"),
                    &[
                        vec![x.sin(), x.cos(), 0.3 * x],
                        vec![1.0 + x, (2.0 * x).sin(), -0.4],
                        vec![0.2, 0.1 * x, x.cos()],
                    ],
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn empty_dataset() {
        let c = make_contrast(ContrastKind::EqualMeans, 3).unwrap();
        let run = run_tests(&[], Method::UT2, &c, None, &TestOptions::default()).unwrap();
        assert!(run.results.is_empty());
    }

    #[test]
    fn permutation_equivariance() {
        let c = make_contrast(ContrastKind::EqualMeans, 3).unwrap();
        let prior = Prior::Wishart(WishartPrior::new(SpdMatrix::identity(2), 6.5).unwrap());
        let g = genes();
        let mut rev = g.clone();
        rev.reverse();
        let a = run_tests(&g, Method::ShHT2, &c, Some(&prior), &TestOptions::default()).unwrap();
        let mut b = run_tests(
            &rev,
            Method::ShHT2,
            &c,
            Some(&prior),
            &TestOptions::default(),
        )
        .unwrap();
        b.results.reverse();
        assert_eq!(a.results, b.results);
    }

    #[test]
    fn prior_dimension_must_match_rank() {
        let c = make_contrast(ContrastKind::EqualMeans, 3).unwrap();
        let prior = Prior::Wishart(WishartPrior::new(SpdMatrix::identity(3), 7.0).unwrap());
        assert!(matches!(
            run_tests(
                &genes(),
                Method::ShHT2,
                &c,
                Some(&prior),
                &TestOptions::default()
            ),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
        assert!(run_tests(
            &genes(),
            Method::ShUT2,
            &c,
            Some(&prior),
            &TestOptions::default()
        )
        .is_err());
    }

    #[test]
    fn undefined_genes_are_flagged() {
        // n = 3 replicates cannot support a rank-3 classical test
        let c = make_contrast(ContrastKind::ZeroMeans, 3).unwrap();
        let run = run_tests(&genes(), Method::HT2, &c, None, &TestOptions::default()).unwrap();
        assert_eq!(run.results.len(), 6);
        assert!(run
            .results
            .iter()
            .all(|r| !r.is_applicable() && r.pvalue.is_nan()));
        assert_eq!(run.diagnostics.len(), 6);
    }
}
