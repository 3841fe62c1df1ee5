//! Benjamini-Hochberg step-up selection over a ranked gene list.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::stats::TestResult;

/// What happens to genes whose p-value is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NaPolicy {
    /// Leave them out; `G` counts only tested genes.
    #[default]
    Drop,
    /// Treat them as `p = 1`.
    ImputeOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneRow {
    pub gene_id: String,
    pub statistic: f64,
    pub pvalue: f64,
    /// 1-based position after sorting by p-value, ties by gene id.
    pub rank: usize,
    /// `rank * fdr / G`.
    pub threshold: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneTable {
    pub rows: Vec<GeneRow>,
    pub fdr: f64,
    /// Genes left out of the ranking under [`NaPolicy::Drop`].
    pub dropped: Vec<String>,
}

impl GeneTable {
    pub fn significant(&self) -> impl Iterator<Item = &GeneRow> {
        self.rows.iter().take_while(|r| r.significant)
    }

    pub fn n_significant(&self) -> usize {
        self.significant().count()
    }
}

fn check_fdr(fdr: f64) -> Result<()> {
    if fdr > 0.0 && fdr < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("fdr must lie in (0, 1), got {fdr}")))
    }
}

// Number of leading entries of the sorted p-values that are rejected.
fn step_up_count(sorted: &[f64], fdr: f64) -> usize {
    let g = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .rev()
        .find(|(i, &p)| p <= (*i as f64 + 1.0) * fdr / g)
        .map_or(0, |(i, _)| i + 1)
}

/// Ranks test results and flags the BH-significant prefix.
pub fn bh_table(results: &[TestResult], fdr: f64, policy: NaPolicy) -> Result<GeneTable> {
    check_fdr(fdr)?;
    let mut dropped = Vec::new();
    let mut entries: Vec<(&str, f64, f64)> = Vec::with_capacity(results.len());
    for r in results {
        let valid = r.pvalue.is_finite() && (0.0..=1.0).contains(&r.pvalue);
        match (valid, policy) {
            (true, _) => entries.push((&r.gene_id, r.statistic, r.pvalue)),
            (false, NaPolicy::ImputeOne) => entries.push((&r.gene_id, r.statistic, 1.0)),
            (false, NaPolicy::Drop) => dropped.push(r.gene_id.clone()),
        }
    }
    entries.sort_by(|a, b| a.2.total_cmp(&b.2).then_with(|| a.0.cmp(b.0)));
    let sorted: Vec<f64> = entries.iter().map(|e| e.2).collect();
    let k = step_up_count(&sorted, fdr);
    let g = entries.len() as f64;
    let rows = entries
        .into_iter()
        .enumerate()
        .map(|(i, (id, statistic, pvalue))| GeneRow {
            gene_id: id.to_string(),
            statistic,
            pvalue,
            rank: i + 1,
            threshold: (i as f64 + 1.0) * fdr / g,
            significant: i < k,
        })
        .collect();
    Ok(GeneTable { rows, fdr, dropped })
}

/// Significance mask in input order. Non-finite p-values are never selected
/// and do not count toward `G`.
pub fn bh_select(pvalues: &[f64], fdr: f64) -> Result<Vec<bool>> {
    check_fdr(fdr)?;
    let mut order: Vec<usize> = (0..pvalues.len())
        .filter(|&i| pvalues[i].is_finite())
        .collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| pvalues[i]).collect();
    let k = step_up_count(&sorted, fdr);
    let mut mask = vec![false; pvalues.len()];
    for &i in &order[..k] {
        mask[i] = true;
    }
    Ok(mask)
}

/// `(etpr, efpr)` with `efpr` the false-discovery proportion among the
/// called genes (zero when nothing is called).
pub fn confusion(table: &GeneTable, truth: &HashSet<String>) -> (f64, f64) {
    let (mut tp, mut fp) = (0usize, 0usize);
    for r in table.significant() {
        if truth.contains(&r.gene_id) {
            tp += 1;
        } else {
            fp += 1;
        }
    }
    rates(tp, fp, truth.len())
}

/// As [`confusion`] for parallel boolean masks.
pub fn confusion_mask(called: &[bool], truth: &[bool]) -> (f64, f64) {
    let (mut tp, mut fp) = (0usize, 0usize);
    for (&c, &t) in called.iter().zip(truth) {
        if c {
            if t {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    rates(tp, fp, truth.iter().filter(|&&t| t).count())
}

fn rates(tp: usize, fp: usize, positives: usize) -> (f64, f64) {
    let etpr = if positives == 0 {
        0.0
    } else {
        tp as f64 / positives as f64
    };
    let efpr = fp as f64 / (tp + fp).max(1) as f64;
    (etpr, efpr)
}
