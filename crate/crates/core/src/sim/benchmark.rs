//! Monte Carlo operating characteristics of the four statistics.

use super::config::SimConfig;
use super::generate::gen_dataset;
use crate::error::{Error, Result};
use crate::model::{fit_simple_prior, fit_wishart_prior};
use crate::multiplicity::{bh_select, confusion_mask};
use crate::stats::{make_contrast, run_tests, ContrastKind, Method, TestOptions};

/// Step of the false-discovery grid on which ordering curves are averaged.
pub const CURVE_STEP: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub method: Method,
    pub fdr: f64,
    pub etpr: f64,
    pub efpr: f64,
    pub etpr_se: f64,
    pub efpr_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCurve {
    pub method: Method,
    /// `(efpr, etpr)`: the best true-positive rate reachable by a threshold
    /// on the statistic whose false-discovery proportion is at most `efpr`,
    /// averaged over replicates.
    pub points: Vec<(f64, f64)>,
}

impl OrderingCurve {
    /// Averaged `etpr` at the grid point nearest `efpr`.
    pub fn etpr_at(&self, efpr: f64) -> f64 {
        let i = ((efpr / CURVE_STEP).round() as usize).min(self.points.len() - 1);
        self.points[i].1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub replicate: u32,
    pub nu_hat: f64,
    pub simple_rate: f64,
    pub simple_shape: f64,
    /// Why the replicate was left out of the averages, if it was.
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub theta: f64,
    pub rows: Vec<RateRow>,
    pub curves: Vec<OrderingCurve>,
    pub replicates: Vec<ReplicateRecord>,
}

impl SimSummary {
    pub fn row(&self, method: Method, fdr: f64) -> Option<&RateRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && (r.fdr - fdr).abs() < 1e-12)
    }

    pub fn curve(&self, method: Method) -> Option<&OrderingCurve> {
        self.curves.iter().find(|c| c.method == method)
    }

    pub fn used_replicates(&self) -> usize {
        self.replicates
            .iter()
            .filter(|r| r.excluded.is_none())
            .count()
    }
}

/// Cumulative sweep of thresholds from the largest statistic down; tied
/// statistics enter together. Undefined statistics never enter.
pub fn ordering_sweep(statistics: &[f64], truth: &[bool]) -> Vec<(f64, f64)> {
    let positives = truth.iter().filter(|&&t| t).count().max(1) as f64;
    let mut order: Vec<usize> = (0..statistics.len())
        .filter(|&i| !statistics[i].is_nan())
        .collect();
    order.sort_by(|&a, &b| statistics[b].total_cmp(&statistics[a]).then(a.cmp(&b)));
    let mut points = Vec::with_capacity(order.len());
    let (mut tp, mut called) = (0usize, 0usize);
    for (k, &i) in order.iter().enumerate() {
        called += 1;
        if truth[i] {
            tp += 1;
        }
        let last_of_tie = order
            .get(k + 1)
            .map_or(true, |&j| statistics[j] != statistics[i]);
        if last_of_tie {
            points.push(((called - tp) as f64 / called as f64, tp as f64 / positives));
        }
    }
    points
}

fn curve_grid() -> Vec<f64> {
    let steps = (1.0 / CURVE_STEP).round() as usize;
    (0..=steps).map(|i| i as f64 * CURVE_STEP).collect()
}

/// Best `etpr` among sweep points with false-discovery proportion `<= x`,
/// for each `x` in the grid.
pub fn curve_on_grid(sweep: &[(f64, f64)], grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&x| {
            sweep
                .iter()
                .filter(|(fdp, _)| *fdp <= x + 1e-12)
                .map(|&(_, tpr)| tpr)
                .fold(0.0, f64::max)
        })
        .collect()
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

struct ReplicateOutcome {
    // [method][fdr] -> (etpr, efpr)
    rates: Vec<Vec<(f64, f64)>>,
    // [method] -> curve on the grid
    curves: Vec<Vec<f64>>,
}

fn run_replicate(
    config: &SimConfig,
    rep: u32,
    grid: &[f64],
) -> Result<(ReplicateRecord, Option<ReplicateOutcome>)> {
    let data = gen_dataset(config, rep)?;
    let contrast = make_contrast(ContrastKind::ZeroMeans, config.dim)?;
    let wishart = fit_wishart_prior(&data.samples, &config.fit)?;
    let simple = fit_simple_prior(&data.samples, &config.fit)?;
    let wp = wishart.prior.as_wishart().expect("wishart fit").clone();
    let sp = *simple.prior.as_simple().expect("simple fit");
    let mut record = ReplicateRecord {
        replicate: rep,
        nu_hat: wp.nu(),
        simple_rate: sp.rate(),
        simple_shape: sp.shape(),
        excluded: None,
    };
    let mut reasons = Vec::new();
    if !wishart.converged {
        reasons.push(format!(
            "inverse-Wishart fit did not converge (gradient {:e})",
            wishart.grad_norm
        ));
    }
    if !simple.converged {
        reasons.push(format!(
            "inverse-gamma fit did not converge (gradient {:e})",
            simple.grad_norm
        ));
    }
    if !reasons.is_empty() {
        record.excluded = Some(reasons.join("; "));
        return Ok((record, None));
    }

    let options = TestOptions {
        hotelling_df: config.hotelling_df,
    };
    let mut rates = Vec::new();
    let mut curves = Vec::new();
    for method in Method::ALL {
        let prior = match method {
            Method::ShHT2 => Some(&wishart.prior),
            Method::ShUT2 => Some(&simple.prior),
            _ => None,
        };
        let run = run_tests(&data.samples, method, &contrast, prior, &options)?;
        let pvalues: Vec<f64> = run.results.iter().map(|r| r.pvalue).collect();
        let stats: Vec<f64> = run.results.iter().map(|r| r.statistic).collect();
        let per_fdr = config
            .fdr_grid
            .iter()
            .map(|&q| Ok(confusion_mask(&bh_select(&pvalues, q)?, &data.truth)))
            .collect::<Result<Vec<_>>>()?;
        rates.push(per_fdr);
        curves.push(curve_on_grid(&ordering_sweep(&stats, &data.truth), grid));
    }
    Ok((record, Some(ReplicateOutcome { rates, curves })))
}

/// Runs every replicate: simulate, re-fit both priors, score all four
/// statistics, select at each nominal FDR and sweep the ordering curves.
/// Replicates whose prior fits do not converge are recorded and excluded.
pub fn run_benchmark(config: &SimConfig) -> Result<SimSummary> {
    run_benchmark_with(config, |_, _| {})
}

/// As [`run_benchmark`], reporting each finished replicate to `progress`.
pub fn run_benchmark_with(
    config: &SimConfig,
    mut progress: impl FnMut(u32, &ReplicateRecord),
) -> Result<SimSummary> {
    config.validate()?;
    let theta = super::generate::effect_theta(config)?;
    let grid = curve_grid();
    let mut records = Vec::new();
    let mut outcomes = Vec::new();
    for rep in 0..config.reps as u32 {
        let (record, outcome) = run_replicate(config, rep, &grid)?;
        progress(rep, &record);
        records.push(record);
        if let Some(o) = outcome {
            outcomes.push(o);
        }
    }
    if outcomes.is_empty() && config.reps > 0 {
        return Err(Error::NonConvergence {
            iterations: config.fit.max_iter,
        });
    }

    let mut rows = Vec::new();
    for (m, method) in Method::ALL.into_iter().enumerate() {
        for (q, &fdr) in config.fdr_grid.iter().enumerate() {
            let etpr: Vec<f64> = outcomes.iter().map(|o| o.rates[m][q].0).collect();
            let efpr: Vec<f64> = outcomes.iter().map(|o| o.rates[m][q].1).collect();
            let (etpr, etpr_se) = mean_se(&etpr);
            let (efpr, efpr_se) = mean_se(&efpr);
            rows.push(RateRow {
                method,
                fdr,
                etpr,
                efpr,
                etpr_se,
                efpr_se,
            });
        }
    }
    let curves = Method::ALL
        .into_iter()
        .enumerate()
        .map(|(m, method)| OrderingCurve {
            method,
            points: grid
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let vals: Vec<f64> = outcomes.iter().map(|o| o.curves[m][i]).collect();
                    (x, mean_se(&vals).0)
                })
                .collect(),
        })
        .collect();
    Ok(SimSummary {
        theta,
        rows,
        curves,
        replicates: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_handles_ties_and_nan() {
        let stats = [5.0, 3.0, 3.0, f64::NAN, 1.0];
        let truth = [true, false, true, true, false];
        let sweep = ordering_sweep(&stats, &truth);
        // thresholds 5, 3 (two genes), 1
        assert_eq!(sweep.len(), 3);
        assert_eq!(sweep[0], (0.0, 1.0 / 3.0));
        assert_eq!(sweep[1], (1.0 / 3.0, 2.0 / 3.0));
        assert_eq!(sweep[2], (0.5, 2.0 / 3.0));
    }

    #[test]
    fn grid_curve_is_monotone() {
        let sweep = vec![(0.0, 0.2), (0.1, 0.5), (0.05, 0.4), (0.3, 0.9)];
        let grid = [0.0, 0.05, 0.1, 0.2, 0.3];
        assert_eq!(curve_on_grid(&sweep, &grid), vec![0.2, 0.4, 0.5, 0.5, 0.9]);
    }

    #[test]
    fn mean_and_standard_error() {
        assert_eq!(mean_se(&[2.0]), (2.0, 0.0));
        let (m, se) = mean_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tiny_benchmark_runs() {
        let cfg = SimConfig {
            genes: 400,
            true_positives: 20,
            reps: 2,
            ..SimConfig::paper_model()
        };
        let s = run_benchmark(&cfg).unwrap();
        assert_eq!(s.rows.len(), 4 * 5);
        assert_eq!(s.curves.len(), 4);
        assert_eq!(s.replicates.len(), 2);
        for r in &s.rows {
            if r.etpr.is_finite() {
                assert!((0.0..=1.0).contains(&r.etpr) && (0.0..=1.0).contains(&r.efpr));
            }
        }
        assert_eq!(run_benchmark(&cfg).unwrap(), s);
    }
}
