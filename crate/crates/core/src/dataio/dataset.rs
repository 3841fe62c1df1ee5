//! Delimited expression matrices: one row per gene, one column per
//! (replicate, condition) cell.
//!
//! ```text
//! # platform: hgu95av2
//! # scale: log2
//! gene    r1c1  r1c2  r2c1  r2c2
//! BRCA1   0.12  -0.4  0.3   NA
//! ```
//!
//! The layout maps data columns to cells, either positionally
//! (`r1c1,r1c2,...`) or by header name (`dheaA:r1c1,...`). Without a layout,
//! the header names themselves must be `rIcJ` tokens.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::GeneSample;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionDataset {
    pub gene_ids: Vec<String>,
    /// Replicates per gene before missing values are removed.
    pub replicates: usize,
    pub conditions: usize,
    /// Per gene, `replicates * conditions` cells ordered replicate-major;
    /// `None` marks a missing value.
    pub values: Vec<Vec<Option<f64>>>,
    pub metadata: Vec<(String, String)>,
    pub condition_names: Vec<String>,
}

/// Genes ready for testing plus those left out.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneSamples {
    pub samples: Vec<GeneSample>,
    /// `(gene id, reason)` for genes with fewer than two complete replicates.
    pub skipped: Vec<(String, String)>,
}

fn parse_cell_token(tok: &str) -> Option<(usize, usize)> {
    let t = tok.trim().to_ascii_lowercase();
    let rest = t.strip_prefix('r')?;
    let (r, c) = rest.split_once('c')?;
    let (r, c) = (r.parse::<usize>().ok()?, c.parse::<usize>().ok()?);
    (r >= 1 && c >= 1).then_some((r - 1, c - 1))
}

/// A column-to-cell mapping.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Token `k` describes data column `k`.
    Positional(Vec<(usize, usize)>),
    /// Header name to cell.
    Named(Vec<(String, (usize, usize))>),
}

impl Layout {
    pub fn parse(spec: &str) -> Result<Self> {
        let tokens: Vec<&str> = spec
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(Error::Layout("empty layout".into()));
        }
        let bad = |t: &str| {
            Error::Layout(format!(
                "bad layout token '{t}', expected rIcJ or NAME:rIcJ"
            ))
        };
        if tokens.iter().any(|t| t.contains(':')) {
            tokens
                .iter()
                .map(|t| {
                    let (name, cell) = t.rsplit_once(':').ok_or_else(|| bad(t))?;
                    Ok((
                        name.trim().to_string(),
                        parse_cell_token(cell).ok_or_else(|| bad(t))?,
                    ))
                })
                .collect::<Result<Vec<_>>>()
                .map(Layout::Named)
        } else {
            tokens
                .iter()
                .map(|t| parse_cell_token(t).ok_or_else(|| bad(t)))
                .collect::<Result<Vec<_>>>()
                .map(Layout::Positional)
        }
    }

    fn resolve(&self, headers: &[String]) -> Result<Vec<(usize, usize)>> {
        match self {
            Layout::Positional(cells) => {
                if cells.len() != headers.len() {
                    return Err(Error::Layout(format!(
                        "layout names {} columns but the file has {} data columns",
                        cells.len(),
                        headers.len()
                    )));
                }
                Ok(cells.clone())
            }
            Layout::Named(map) => headers
                .iter()
                .map(|h| {
                    map.iter()
                        .find(|(name, _)| name == h)
                        .map(|(_, c)| *c)
                        .ok_or_else(|| {
                            Error::Layout(format!("column '{h}' is not mapped by the layout"))
                        })
                })
                .collect(),
        }
    }
}

fn split_line<'a>(line: &'a str, delim: char) -> Vec<&'a str> {
    line.split(delim).map(|f| f.trim()).collect()
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field.eq_ignore_ascii_case("na") || field.eq_ignore_ascii_case("nan")
}

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

/// Parses dataset text. `path` is used only in error messages.
pub fn parse_dataset_str(
    text: &str,
    path: &Path,
    layout: Option<&Layout>,
) -> Result<ExpressionDataset> {
    let mut metadata = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (header_no, header) = loop {
        match lines.next() {
            None => return Err(parse_error(path, 0, 0, "no header row")),
            Some((_, l)) if l.trim_start().starts_with('#') => {
                let body = l.trim_start().trim_start_matches('#').trim();
                if let Some((k, v)) = body.split_once(':').or_else(|| body.split_once('=')) {
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
            Some((i, l)) => break (i + 1, l),
        }
    };
    let delim = if header.contains('\t') { '\t' } else { ',' };
    let head = split_line(header, delim);
    if head.len() < 2 {
        return Err(parse_error(
            path,
            header_no,
            1,
            "header needs a gene column and at least one data column",
        ));
    }
    let headers: Vec<String> = head[1..].iter().map(|s| s.to_string()).collect();
    let cells = match layout {
        Some(l) => l.resolve(&headers)?,
        None => headers
            .iter()
            .map(|h| {
                parse_cell_token(h).ok_or_else(|| {
                    Error::Layout(format!("column '{h}' is not an rIcJ name; supply a layout"))
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let replicates = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
    let conditions = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
    let mut slot = vec![None; replicates * conditions];
    for (k, &(r, c)) in cells.iter().enumerate() {
        let idx = r * conditions + c;
        if let Some(prev) = slot[idx] {
            return Err(Error::Layout(format!(
                "columns '{}' and '{}' both map to replicate {} condition {}",
                headers[prev],
                headers[k],
                r + 1,
                c + 1
            )));
        }
        slot[idx] = Some(k);
    }
    if let Some(hole) = slot.iter().position(Option::is_none) {
        return Err(Error::Layout(format!(
            "no column for replicate {} condition {}",
            hole / conditions + 1,
            hole % conditions + 1
        )));
    }
    let slot: Vec<usize> = slot.into_iter().map(|s| s.expect("checked")).collect();
    // `# conditions: dhea,dht` names the conditions in order
    let condition_names = metadata
        .iter()
        .find(|(k, _)| k == "conditions")
        .map(|(_, v)| {
            v.split(',')
                .map(|s| s.trim().to_string())
                .collect::<Vec<_>>()
        })
        .filter(|names| names.len() == conditions)
        .unwrap_or_else(|| (1..=conditions).map(|c| format!("c{c}")).collect());

    let mut gene_ids = Vec::new();
    let mut seen = HashSet::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim_start().starts_with('#') {
            continue;
        }
        let fields = split_line(line, delim);
        if fields.len() != head.len() {
            return Err(parse_error(
                path,
                line_no,
                fields.len().min(head.len()) + 1,
                format!("expected {} fields, found {}", head.len(), fields.len()),
            ));
        }
        let id = fields[0];
        if id.is_empty() {
            return Err(parse_error(path, line_no, 1, "empty gene id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateGene(id.to_string()));
        }
        let mut row = Vec::with_capacity(slot.len());
        for &col in &slot {
            let field = fields[col + 1];
            if is_missing(field) {
                row.push(None);
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(Some(v)),
                _ => {
                    return Err(parse_error(
                        path,
                        line_no,
                        col + 2,
                        format!("'{field}' is not a finite number"),
                    ))
                }
            }
        }
        gene_ids.push(id.to_string());
        values.push(row);
    }
    Ok(ExpressionDataset {
        gene_ids,
        replicates,
        conditions,
        values,
        metadata,
        condition_names,
    })
}

pub fn parse_dataset(path: &Path, layout: Option<&Layout>) -> Result<ExpressionDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset_str(&text, path, layout)
}

impl ExpressionDataset {
    pub fn len(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gene_ids.is_empty()
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(key))
            .map(|(_, v)| v.as_str())
    }

    /// Replicate vectors of gene `g` with no missing component.
    pub fn complete_rows(&self, g: usize) -> Vec<Vec<f64>> {
        self.values[g]
            .chunks(self.conditions)
            .filter_map(|cells| cells.iter().copied().collect::<Option<Vec<f64>>>())
            .collect()
    }

    /// Smallest complete-replicate count over genes (0 when empty).
    pub fn min_complete(&self) -> usize {
        (0..self.len())
            .map(|g| self.complete_rows(g).len())
            .min()
            .unwrap_or(0)
    }

    /// Writes the dataset back with `rIcJ` headers.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str("gene");
        for r in 0..self.replicates {
            for c in 0..self.conditions {
                out.push_str(&format!("\tr{}c{}", r + 1, c + 1));
            }
        }
        out.push('\n');
        for (id, row) in self.gene_ids.iter().zip(&self.values) {
            out.push_str(id);
            for v in row {
                out.push('\t');
                match v {
                    Some(x) => out.push_str(&super::fmt_num(*x)),
                    None => out.push_str("NA"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Builds per-gene samples from complete replicates; genes with fewer than
/// two complete replicates are listed in `skipped`.
pub fn to_gene_samples(ds: &ExpressionDataset) -> GeneSamples {
    let mut samples = Vec::with_capacity(ds.len());
    let mut skipped = Vec::new();
    for (g, id) in ds.gene_ids.iter().enumerate() {
        let rows = ds.complete_rows(g);
        let result = Matrix::from_rows(&rows).and_then(|m| GeneSample::new(id.clone(), m));
        match result {
            Ok(s) if rows.len() >= 2 => samples.push(s),
            _ => skipped.push((
                id.clone(),
                format!("{} complete replicate(s), need at least 2", rows.len()),
            )),
        }
    }
    GeneSamples { samples, skipped }
}

/// Reads a custom contrast: one row per line, entries separated by commas or
/// whitespace, `#` comments.
pub fn parse_matrix_str(text: &str, path: &Path) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
            .enumerate()
            .map(|(j, t)| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        parse_error(path, i + 1, j + 1, format!("'{t}' is not a finite number"))
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(path, 0, 0, "contrast file has no rows"));
    }
    Matrix::from_rows(&rows).map_err(|_| parse_error(path, 0, 0, "contrast rows differ in length"))
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    const TOY: &str = "# platform: test\n# scale: log2\ngene,r1c1,r1c2,r2c1,r2c2,r3c1,r3c2\n\
                       A,1,2,3,5,2,2\nB,0.5,NA,1,1,2,0\nC,1,1,1,1,1,1\n";

    fn p() -> PathBuf {
        PathBuf::from("toy.csv")
    }

    #[test]
    fn toy_file() {
        let layout = Layout::parse("r1c1,r1c2,r2c1,r2c2,r3c1,r3c2").unwrap();
        let ds = parse_dataset_str(TOY, &p(), Some(&layout)).unwrap();
        assert_eq!((ds.len(), ds.replicates, ds.conditions), (3, 3, 2));
        assert_eq!(ds.meta("platform"), Some("test"));
        assert_eq!(ds, parse_dataset_str(TOY, &p(), None).unwrap());
    }

    #[test]
    fn missing_cell_drops_that_replicate_only() {
        let ds = parse_dataset_str(TOY, &p(), None).unwrap();
        assert_eq!(ds.complete_rows(1), vec![vec![1.0, 1.0], vec![2.0, 0.0]]);
        assert_eq!(ds.complete_rows(0).len(), 3);
        let gs = to_gene_samples(&ds);
        assert_eq!(gs.samples.len(), 3);
        assert_eq!(gs.samples[0].mean(), &[2.0, 3.0]);
        assert!(gs.samples[2].is_degenerate());
    }

    #[test]
    fn too_few_replicates_are_skipped() {
        let text = "gene\tr1c1\tr2c1\nX\t1\tNA\nY\t1\t2\n";
        let gs = to_gene_samples(&parse_dataset_str(text, &p(), None).unwrap());
        assert_eq!(gs.samples.len(), 1);
        assert_eq!(gs.skipped[0].0, "X");
    }

    #[test]
    fn named_layout_in_any_order() {
        let text = "id\tb2\ta1\tb1\ta2\ng\t4\t1\t3\t2\n";
        let layout = Layout::parse("a1:r1c1, a2:r2c1, b1:r1c2, b2:r2c2").unwrap();
        let ds = parse_dataset_str(text, &p(), Some(&layout)).unwrap();
        assert_eq!(
            ds.values[0],
            vec![Some(1.0), Some(3.0), Some(2.0), Some(4.0)]
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_dataset_str("g,r1c1,r2c1\nA,1,2\nA,3,4\n", &p(), None),
            Err(Error::DuplicateGene(id)) if id == "A"
        ));
        assert!(matches!(
            parse_dataset_str("g,r1c1,r2c1\nA,1,x\n", &p(), None),
            Err(Error::Parse {
                line: 2,
                column: 3,
                ..
            })
        ));
        assert!(matches!(
            parse_dataset_str("g,r1c1,r2c1\nA,1\n", &p(), None),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_dataset_str("g,foo\nA,1\n", &p(), None),
            Err(Error::Layout(_))
        ));
        assert!(matches!(
            parse_dataset_str("g,r1c1,r1c1\nA,1,2\n", &p(), None),
            Err(Error::Layout(_))
        ));
        assert!(matches!(
            parse_dataset_str("g,r1c1,r2c2\nA,1,2\n", &p(), None),
            Err(Error::Layout(_))
        ));
        let named = Layout::parse("a:r1c1").unwrap();
        assert!(matches!(
            parse_dataset_str("g,a,b\nA,1,2\n", &p(), Some(&named)),
            Err(Error::Layout(_))
        ));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let ds = parse_dataset_str(
            "g,r1c1,r2c1\nA,0.1,-3.3333333333333335\nB,1e-300,NaN\n",
            &p(),
            None,
        )
        .unwrap();
        let back = parse_dataset_str(&ds.to_text(), &p(), None).unwrap();
        assert_eq!(back.values, ds.values);
    }

    #[test]
    fn contrast_matrix_file() {
        let m = parse_matrix_str("# trend\n1 -1 0\n0, 1, -1\n", &p()).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert!(parse_matrix_str("1 2\n3\n", &p()).is_err());
        assert!(parse_matrix_str("", &p()).is_err());
    }
}
