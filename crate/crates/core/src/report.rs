//! Static HTML pages and SVG plots. Output depends only on the inputs, so
//! regenerating a report gives identical bytes.

use std::fmt::Write as _;

use crate::dataio::{fmt_num, PriorFile, ResultsTable};
use crate::model::Prior;
use crate::sim::{RateRow, SimSummary};

/// Gene lookup used when ids are gene symbols. `{id}` is replaced by the
/// URL-encoded gene id.
pub const DEFAULT_LINK_TEMPLATE: &str = "https://www.genecards.org/cgi-bin/carddisp.pl?gene={id}";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub title: String,
    /// Link gene ids through `link_template`.
    pub gene_links: bool,
    pub link_template: String,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            title: "Differential expression report".into(),
            gene_links: false,
            link_template: DEFAULT_LINK_TEMPLATE.into(),
        }
    }
}

/// Whether dataset metadata declares the gene ids to be symbols
/// (`# gene_symbols: yes` or `# id_type: symbol`).
pub fn metadata_has_symbols(metadata: &[(String, String)]) -> bool {
    metadata.iter().any(|(k, v)| {
        let v = v.to_ascii_lowercase();
        match k.to_ascii_lowercase().as_str() {
            "gene_symbols" | "symbols" => matches!(v.as_str(), "yes" | "true" | "1"),
            "id_type" => v == "symbol" || v == "symbols",
            _ => false,
        }
    })
}

pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn url_encode(s: &str) -> String {
    let mut out = String::new();
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

pub fn gene_link(template: &str, id: &str) -> String {
    template.replace("{id}", &url_encode(id))
}

// Three significant digits, like a printed table.
fn short(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else if x != 0.0 && !(1e-3..1e5).contains(&x.abs()) {
        format!("{x:.3e}")
    } else {
        format!("{x:.3}")
    }
}

const STYLE: &str = "body{font-family:sans-serif;margin:2em;color:#222}\
table{border-collapse:collapse}td,th{padding:2px 8px;border-bottom:1px solid #ddd;text-align:right}\
td:nth-child(2),th:nth-child(2){text-align:left}.sig{background:#eef6ee}\
.banner{padding:8px;background:#fff4d6;border:1px solid #e0c060;display:inline-block}\
dl{display:grid;grid-template-columns:max-content auto;gap:2px 12px}dt{font-weight:bold}";

fn page(title: &str, body: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{t}</title>\n\
         <style>{STYLE}</style>\n</head>\n<body>\n<h1>{t}</h1>\n{body}</body>\n</html>\n",
        t = escape_html(title)
    )
}

/// Ranked gene list in the layout gene, per-condition effects, statistic,
/// p-value and BH threshold at the table's FDR.
pub fn results_section(table: &ResultsTable, options: &ReportOptions) -> String {
    let mut s = String::new();
    let n_sig = table.n_significant();
    let _ = writeln!(
        s,
        "<h2>{} test of {}</h2>",
        escape_html(&table.method),
        escape_html(&table.contrast)
    );
    let banner = if n_sig == 0 {
        format!("0 significant genes at FDR {}", fmt_num(table.fdr))
    } else {
        format!(
            "{n_sig} significant of {} genes at FDR {}",
            table.rows.len(),
            fmt_num(table.fdr)
        )
    };
    let _ = writeln!(s, "<p class=\"banner\">{banner}</p>");
    s.push_str("<table>\n<tr><th></th><th>gene</th>");
    for name in &table.effect_names {
        let _ = write!(s, "<th>{}</th>", escape_html(name));
    }
    let _ = writeln!(
        s,
        "<th>stat</th><th>p-val</th><th>FDR={}</th><th>flag</th></tr>",
        fmt_num(table.fdr)
    );
    let link = options.gene_links;
    for (i, r) in table.rows.iter().enumerate() {
        let class = if r.significant { " class=\"sig\"" } else { "" };
        let id = escape_html(&r.gene_id);
        let gene = if link {
            format!(
                "<a href=\"{}\">{id}</a>",
                escape_html(&gene_link(&options.link_template, &r.gene_id))
            )
        } else {
            id
        };
        let _ = write!(s, "<tr{class}><td>{}</td><td>{gene}</td>", i + 1);
        for e in &r.effects {
            let _ = write!(s, "<td>{}</td>", short(*e));
        }
        let _ = writeln!(
            s,
            "<td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
            short(r.statistic),
            short(r.pvalue),
            short(r.threshold),
            escape_html(&r.flag)
        );
    }
    s.push_str("</table>\n");
    s
}

pub fn prior_section(prior: &PriorFile) -> String {
    let mut s = String::from("<h2>Fitted prior</h2>\n<dl>\n");
    let mut item = |k: &str, v: String| {
        let _ = writeln!(s, "<dt>{k}</dt><dd>{}</dd>", escape_html(&v));
    };
    item("hypothesis", prior.contrast.clone());
    item("dimension", prior.dim.to_string());
    match &prior.prior {
        Prior::Wishart(p) => {
            item("structure", "general (inverse Wishart)".into());
            item("degrees of freedom", fmt_num(p.nu()));
            let m = p.lambda().matrix();
            let rows: Vec<String> = (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .map(|j| short(m[(i, j)]))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            item("scale matrix", rows.join("; "));
        }
        Prior::Simple(p) => {
            item("structure", "simple (inverse gamma)".into());
            item("rate", fmt_num(p.rate()));
            item("shape", fmt_num(p.shape()));
        }
    }
    if let Some(v) = prior.loglik {
        item("log-likelihood", fmt_num(v));
    }
    if let Some(v) = prior.iterations {
        item("iterations", v.to_string());
    }
    if let Some(v) = prior.converged {
        item("converged", v.to_string());
    }
    if let Some(v) = prior.genes_used {
        item("genes used", v.to_string());
    }
    s.push_str("</dl>\n");
    s
}

pub fn rates_section(rows: &[RateRow], caption: Option<&str>) -> String {
    let mut s = String::from("<h2>Operating characteristics</h2>\n");
    if let Some(c) = caption {
        let _ = writeln!(s, "<p>{}</p>", escape_html(c));
    }
    s.push_str("<table>\n<tr><th>method</th><th>FDR</th><th>etpr</th><th>efpr</th><th>se(etpr)</th><th>se(efpr)</th></tr>\n");
    for r in rows {
        let _ = writeln!(
            s,
            "<tr><td>{}</td><td>{}</td><td>{:.3}</td><td>{:.3}</td><td>{:.3}</td><td>{:.3}</td></tr>",
            r.method,
            fmt_num(r.fdr),
            r.etpr,
            r.efpr,
            r.etpr_se,
            r.efpr_se
        );
    }
    s.push_str("</table>\n");
    s
}

const PALETTE: [&str; 6] = [
    "#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#444444",
];

/// Line plot of `(efpr, etpr)` curves on the unit square.
pub fn curves_svg(curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let (w, h, pad) = (480.0, 360.0, 48.0);
    let px = |x: f64| pad + x * (w - 2.0 * pad);
    let py = |y: f64| h - pad - y * (h - 2.0 * pad);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <path d=\"M{x0} {y0}H{x1}M{x0} {y0}V{y1}\" stroke=\"black\" fill=\"none\"/>\n",
        x0 = px(0.0),
        y0 = py(0.0),
        x1 = px(1.0),
        y1 = py(1.0)
    );
    for t in 0..=5 {
        let v = t as f64 / 5.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{v:.1}</text>\
             <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{v:.1}</text>",
            px(v),
            py(0.0) + 14.0,
            px(0.0) - 4.0,
            py(v) + 3.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">efpr</text>\
         <text x=\"12\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 12 {:.1})\">etpr</text>",
        px(0.5),
        h - 8.0,
        py(0.5),
        py(0.5)
    );
    for (k, (name, points)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for &(x, y) in points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
        {
            let _ = write!(
                d,
                "{}{:.2} {:.2}",
                if d.is_empty() { "M" } else { "L" },
                px(x),
                py(y)
            );
        }
        if !d.is_empty() {
            let _ = writeln!(
                s,
                "<path d=\"{d}\" stroke=\"{color}\" stroke-width=\"1.5\" fill=\"none\"/>"
            );
        }
        let ly = pad + 14.0 * k as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\
             <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{}</text>",
            w - pad - 70.0,
            w - pad - 52.0,
            w - pad - 48.0,
            ly + 4.0,
            escape_html(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn summary_curves(summary: &SimSummary) -> Vec<(String, Vec<(f64, f64)>)> {
    summary
        .curves
        .iter()
        .map(|c| (c.method.to_string(), c.points.clone()))
        .collect()
}

/// Everything a report can bundle; absent parts are left out.
#[derive(Debug, Default)]
pub struct ReportInputs<'a> {
    pub results: Option<&'a ResultsTable>,
    pub prior: Option<&'a PriorFile>,
    pub rates: Option<&'a [RateRow]>,
    pub rates_caption: Option<String>,
    pub curves: Option<&'a [(String, Vec<(f64, f64)>)]>,
}

pub fn render_report(inputs: &ReportInputs, options: &ReportOptions) -> String {
    let mut body = String::new();
    if let Some(p) = inputs.prior {
        body.push_str(&prior_section(p));
    }
    if let Some(t) = inputs.results {
        body.push_str(&results_section(t, options));
    }
    if let Some(r) = inputs.rates {
        body.push_str(&rates_section(r, inputs.rates_caption.as_deref()));
    }
    if let Some(c) = inputs.curves {
        body.push_str("<h2>Ordering curves</h2>\n");
        body.push_str(&curves_svg(c));
    }
    page(&options.title, &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::ResultRow;

    fn table(rows: Vec<ResultRow>) -> ResultsTable {
        ResultsTable {
            method: "ShHT2".into(),
            contrast: "equal.means".into(),
            fdr: 0.1,
            gene_symbols: true,
            effect_names: vec!["dhea".into(), "dht".into()],
            rows,
        }
    }

    fn row(id: &str, p: f64, significant: bool) -> ResultRow {
        ResultRow {
            gene_id: id.into(),
            effects: vec![1.69, 4.4],
            statistic: 273.0,
            df1: 1.0,
            df2: 8.0,
            pvalue: p,
            rank: Some(1),
            significant,
            threshold: 7.129e-6,
            flag: String::new(),
        }
    }

    #[test]
    fn empty_results_show_banner() {
        let html = render_report(
            &ReportInputs {
                results: Some(&table(vec![])),
                ..Default::default()
            },
            &ReportOptions::default(),
        );
        assert!(html.contains("0 significant"));
        assert!(html.starts_with("<!DOCTYPE html>") && html.ends_with("</html>\n"));
    }

    #[test]
    fn links_follow_the_flag() {
        let t = table(vec![row("34319_at", 1.9e-7, true), row("A&B", 0.5, false)]);
        let on = ReportOptions {
            gene_links: true,
            ..Default::default()
        };
        let html = results_section(&t, &on);
        assert!(
            html.contains("href=\"https://www.genecards.org/cgi-bin/carddisp.pl?gene=34319_at\"")
        );
        assert!(html.contains("gene=A%26B\">A&amp;B</a>"));
        assert!(
            html.contains("<th>dhea</th><th>dht</th><th>stat</th><th>p-val</th><th>FDR=0.1</th>")
        );
        let off = results_section(&t, &ReportOptions::default());
        assert!(!off.contains("href"));
    }

    #[test]
    fn symbol_metadata() {
        let meta = |k: &str, v: &str| vec![(k.to_string(), v.to_string())];
        assert!(metadata_has_symbols(&meta("gene_symbols", "yes")));
        assert!(metadata_has_symbols(&meta("id_type", "Symbol")));
        assert!(!metadata_has_symbols(&meta("platform", "hgu95av2")));
    }

    #[test]
    fn svg_is_deterministic() {
        let c = vec![(
            "ShHT2".to_string(),
            vec![(0.0, 0.5), (0.5, 0.9), (1.0, f64::NAN)],
        )];
        let a = curves_svg(&c);
        assert_eq!(a, curves_svg(&c));
        assert!(a.contains("M48.00 180.00L240.00 74.40"));
    }
}
