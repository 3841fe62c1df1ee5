//! Ranked result tables and simulation outputs as CSV.

use std::collections::HashMap;
use std::path::Path;

use super::fmt_num;
use crate::error::{Error, Result};
use crate::model::GeneSample;
use crate::multiplicity::GeneTable;
use crate::sim::{RateRow, SimSummary};
use crate::stats::Method;
use crate::stats::TestResult;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub gene_id: String,
    /// Per-condition sample means.
    pub effects: Vec<f64>,
    pub statistic: f64,
    pub df1: f64,
    pub df2: f64,
    pub pvalue: f64,
    /// BH rank; `None` for genes that could not be tested.
    pub rank: Option<usize>,
    pub significant: bool,
    pub threshold: f64,
    pub flag: String,
}

/// A gene list sorted by ascending p-value; untestable genes trail.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub method: String,
    pub contrast: String,
    pub fdr: f64,
    /// Gene ids are symbols, so they can be linked to a gene database.
    pub gene_symbols: bool,
    pub effect_names: Vec<String>,
    pub rows: Vec<ResultRow>,
}

impl ResultsTable {
    /// Joins ranked BH output with the per-gene results and sample means.
    /// `results` and `samples` may be in any order; genes absent from
    /// `samples` get undefined effects.
    pub fn assemble(
        method: &str,
        contrast: &str,
        effect_names: Vec<String>,
        table: &GeneTable,
        results: &[TestResult],
        samples: &[GeneSample],
        extra_flags: &[(String, String)],
    ) -> Self {
        let by_id: HashMap<&str, &TestResult> =
            results.iter().map(|r| (r.gene_id.as_str(), r)).collect();
        let means: HashMap<&str, &[f64]> = samples.iter().map(|s| (s.id(), s.mean())).collect();
        let k = effect_names.len();
        let effects = |id: &str| means.get(id).map_or(vec![f64::NAN; k], |m| m.to_vec());
        let flag_of = |id: &str, r: Option<&&TestResult>| {
            r.and_then(|r| r.flag.clone())
                .or_else(|| {
                    extra_flags
                        .iter()
                        .find(|(g, _)| g == id)
                        .map(|(_, f)| f.clone())
                })
                .unwrap_or_default()
        };
        let mut rows: Vec<ResultRow> = table
            .rows
            .iter()
            .map(|g| {
                let r = by_id.get(g.gene_id.as_str());
                ResultRow {
                    gene_id: g.gene_id.clone(),
                    effects: effects(&g.gene_id),
                    statistic: g.statistic,
                    df1: r.map_or(f64::NAN, |r| r.df1),
                    df2: r.map_or(f64::NAN, |r| r.df2),
                    pvalue: g.pvalue,
                    rank: Some(g.rank),
                    significant: g.significant,
                    threshold: g.threshold,
                    flag: flag_of(&g.gene_id, r),
                }
            })
            .collect();
        let mut untested: Vec<&str> = table.dropped.iter().map(String::as_str).collect();
        untested.extend(
            extra_flags
                .iter()
                .map(|(g, _)| g.as_str())
                .filter(|g| !by_id.contains_key(g)),
        );
        untested.sort_unstable();
        untested.dedup();
        for id in untested {
            let r = by_id.get(id);
            rows.push(ResultRow {
                gene_id: id.to_string(),
                effects: effects(id),
                statistic: f64::NAN,
                df1: f64::NAN,
                df2: f64::NAN,
                pvalue: f64::NAN,
                rank: None,
                significant: false,
                threshold: f64::NAN,
                flag: flag_of(id, r),
            });
        }
        ResultsTable {
            method: method.to_string(),
            contrast: contrast.to_string(),
            fdr: table.fdr,
            gene_symbols: false,
            effect_names,
            rows,
        }
    }

    pub fn n_significant(&self) -> usize {
        self.rows.iter().filter(|r| r.significant).count()
    }

    pub fn to_csv(&self) -> String {
        let mut header = vec!["gene".to_string()];
        header.extend(self.effect_names.iter().cloned());
        header.extend(TAIL.iter().map(|s| s.to_string()));
        let mut records = vec![header];
        for r in &self.rows {
            let mut rec = vec![r.gene_id.clone()];
            rec.extend(r.effects.iter().map(|e| fmt_num(*e)));
            rec.extend([
                fmt_num(r.statistic),
                fmt_num(r.df1),
                fmt_num(r.df2),
                fmt_num(r.pvalue),
                r.rank.map_or("NA".to_string(), |k| k.to_string()),
                r.significant.to_string(),
                fmt_num(r.threshold),
                r.flag.clone(),
            ]);
            records.push(rec);
        }
        let comment = format!(
            "# method={} contrast={} fdr={} symbols={}\n",
            self.method,
            self.contrast,
            fmt_num(self.fdr),
            self.gene_symbols
        );
        comment + &write_csv(&records)
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let err = |line: u64, message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line as usize,
            column: 0,
            message,
        };
        let (first, body) = text.split_once('\n').unwrap_or((text, ""));
        let meta: HashMap<&str, &str> = first
            .strip_prefix('#')
            .ok_or_else(|| err(1, "missing '# method=... fdr=...' line".into()))?
            .split_whitespace()
            .filter_map(|part| part.split_once('='))
            .collect();
        let fdr = meta
            .get("fdr")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(1, "missing 'fdr' in the comment line".into()))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(body.as_bytes());
        let mut records = reader.records();
        let cols = match records.next() {
            Some(Ok(h)) => h,
            _ => return Err(err(2, "missing header".into())),
        };
        let cols: Vec<&str> = cols.iter().collect();
        if cols.len() < 1 + TAIL.len()
            || cols[0] != "gene"
            || cols[cols.len() - TAIL.len()..] != TAIL
        {
            return Err(err(2, "unexpected results header".into()));
        }
        let k = cols.len() - 1 - TAIL.len();
        let effect_names = cols[1..1 + k].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for rec in records {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() + 1);
                err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() + 1);
            let num = |j: usize| -> Result<f64> {
                match &rec[j] {
                    "NA" => Ok(f64::NAN),
                    f => f
                        .parse()
                        .map_err(|_| err(line, format!("bad number '{f}'"))),
                }
            };
            let t = 1 + k;
            rows.push(ResultRow {
                gene_id: rec[0].to_string(),
                effects: (1..t).map(num).collect::<Result<_>>()?,
                statistic: num(t)?,
                df1: num(t + 1)?,
                df2: num(t + 2)?,
                pvalue: num(t + 3)?,
                rank: match &rec[t + 4] {
                    "NA" => None,
                    f => Some(
                        f.parse()
                            .map_err(|_| err(line, format!("bad rank '{f}'")))?,
                    ),
                },
                significant: &rec[t + 5] == "true",
                threshold: num(t + 6)?,
                flag: rec[t + 7].to_string(),
            });
        }
        Ok(ResultsTable {
            method: meta.get("method").unwrap_or(&"").to_string(),
            contrast: meta.get("contrast").unwrap_or(&"").to_string(),
            fdr,
            gene_symbols: meta.get("symbols") == Some(&"true"),
            effect_names,
            rows,
        })
    }
}

const TAIL: [&str; 8] = [
    "statistic",
    "df1",
    "df2",
    "pvalue",
    "rank",
    "significant",
    "bh_threshold",
    "flag",
];

fn write_csv(records: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 input")
}

pub fn write_results(table: &ResultsTable, path: &Path) -> Result<()> {
    std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}

pub fn read_results(path: &Path) -> Result<ResultsTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ResultsTable::parse_csv(&text, path)
}

/// Per-method rates by nominal FDR.
pub fn rates_csv(summary: &SimSummary) -> String {
    let mut records = vec![["method", "fdr", "etpr", "efpr", "etpr_se", "efpr_se"]
        .map(String::from)
        .to_vec()];
    for r in &summary.rows {
        records.push(vec![
            r.method.to_string(),
            fmt_num(r.fdr),
            fmt_num(r.etpr),
            fmt_num(r.efpr),
            fmt_num(r.etpr_se),
            fmt_num(r.efpr_se),
        ]);
    }
    write_csv(&records)
}

/// Reads a rates CSV written by [`rates_csv`].
pub fn parse_rates_csv(text: &str, path: &Path) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for rec in reader.records() {
        let bad = |line: u64, message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line as usize,
            column: 0,
            message,
        };
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 6 {
            return Err(bad(
                line,
                "expected method,fdr,etpr,efpr,etpr_se,efpr_se".into(),
            ));
        }
        let num = |j: usize| match &rec[j] {
            "NA" => Ok(f64::NAN),
            f => f
                .parse::<f64>()
                .map_err(|_| bad(line, format!("bad number '{f}'"))),
        };
        rows.push(RateRow {
            method: rec[0]
                .parse::<Method>()
                .map_err(|e| bad(line, e.to_string()))?,
            fdr: num(1)?,
            etpr: num(2)?,
            efpr: num(3)?,
            etpr_se: num(4)?,
            efpr_se: num(5)?,
        });
    }
    Ok(rows)
}

/// Averaged ordering curves as long-format points.
pub fn curves_csv(summary: &SimSummary) -> String {
    let mut records = vec![["method", "efpr", "etpr"].map(String::from).to_vec()];
    for c in &summary.curves {
        for (x, y) in &c.points {
            records.push(vec![c.method.to_string(), fmt_num(*x), fmt_num(*y)]);
        }
    }
    write_csv(&records)
}

/// Per-replicate fitted hyperparameters and exclusions.
pub fn replicates_csv(summary: &SimSummary) -> String {
    let mut records = vec![[
        "replicate",
        "nu_hat",
        "simple_rate",
        "simple_shape",
        "excluded",
    ]
    .map(String::from)
    .to_vec()];
    for r in &summary.replicates {
        records.push(vec![
            r.replicate.to_string(),
            fmt_num(r.nu_hat),
            fmt_num(r.simple_rate),
            fmt_num(r.simple_shape),
            r.excluded.clone().unwrap_or_default(),
        ]);
    }
    write_csv(&records)
}

/// Reads a curves CSV back into `(method, points)` groups in file order.
pub fn parse_curves_csv(text: &str, path: &Path) -> Result<Vec<(String, Vec<(f64, f64)>)>> {
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for rec in reader.records() {
        let bad = |line: u64| Error::Parse {
            path: path.to_path_buf(),
            line: line as usize,
            column: 0,
            message: "expected method,efpr,etpr".into(),
        };
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line())))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |f: &str| match f {
            "NA" => Ok(f64::NAN),
            f => f.parse::<f64>().map_err(|_| bad(line)),
        };
        if rec.len() != 3 {
            return Err(bad(line));
        }
        let point = (num(&rec[1])?, num(&rec[2])?);
        match groups.last_mut() {
            Some((m, pts)) if m == &rec[0] => pts.push(point),
            _ => groups.push((rec[0].to_string(), vec![point])),
        }
    }
    Ok(groups)
}
