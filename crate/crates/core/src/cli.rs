//! Command-line surface: `fit`, `test`, `simulate` and `report`.
//!
//! Exit codes: 0 success, 1 input or output failure, 2 inadmissible request,
//! 3 non-convergence, 4 internal failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::dataio::kv::KvFile;
use crate::dataio::{
    check_prior_dim, curves_csv, load_prior, parse_curves_csv, parse_dataset, parse_rates_csv,
    rates_csv, read_matrix, read_results, replicates_csv, save_prior, to_gene_samples,
    ExpressionDataset, Layout, PriorFile, ResultsTable,
};
use crate::error::{Error, Result};
use crate::model::{fit_simple_prior, fit_wishart_prior, FitConfig, FitReport, GeneSample, Prior};
use crate::multiplicity::{bh_table, NaPolicy};
use crate::report::{
    curves_svg, metadata_has_symbols, render_report, summary_curves, ReportInputs, ReportOptions,
};
use crate::sim::{run_benchmark_with, SimConfig, SimSummary};
use crate::stats::{
    contrast_space, make_contrast, run_tests, Contrast, ContrastKind, HotellingDf, Method,
    TestOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "ebhotelling",
    version,
    about = "Shrinkage-variance Hotelling tests for expression data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the covariance prior across genes and save it.
    Fit(FitArgs),
    /// Test every gene and write the ranked gene list.
    Test(TestArgs),
    /// Monte Carlo comparison of the four statistics.
    Simulate(SimulateArgs),
    /// Bundle saved outputs into one static HTML page.
    Report(ReportArgs),
}

/// Covariance model across replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum VarStruct {
    /// Unstructured covariance with an inverse-Wishart prior.
    #[default]
    General,
    /// Scalar variance with an inverse-gamma prior.
    Simple,
}

impl VarStruct {
    fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true)
            .map_err(|_| Error::domain(format!("unknown variance structure '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Toggle {
    /// Follow the dataset metadata.
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum DfChoice {
    /// `n - r` denominator degrees of freedom.
    #[default]
    Classical,
    /// `n - 1`, as printed for the unshrunk statistic.
    Published,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Expression table (tab or comma delimited, first column gene id).
    #[arg(long)]
    pub input: PathBuf,
    /// Column mapping, e.g. `r1c1,r1c2,...` or `name:r1c1,...`.
    #[arg(long)]
    pub layout: Option<String>,
    #[arg(long, value_enum, default_value_t = VarStruct::General)]
    pub var_struct: VarStruct,
    /// `zero.means`, `equal.means`, `no.trend` or a contrast matrix file.
    #[arg(long, default_value = "equal.means")]
    pub h0: String,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Flat `key=value` file; its entries override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Saved prior; fitted on the fly when omitted.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// ShHT2, HT2, ShUT2 or UT2. Defaults to the shrinkage statistic of the
    /// variance structure.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub fdr: f64,
    /// Also write `results.html`.
    #[arg(long)]
    pub html: bool,
    #[arg(long, value_enum, default_value_t = Toggle::Auto)]
    pub gene_links: Toggle,
    /// Link target with `{id}` standing for the gene id.
    #[arg(long)]
    pub link_template: Option<String>,
    #[arg(long, value_enum, default_value_t = DfChoice::Classical)]
    pub hotelling_df: DfChoice,
    /// Rank untestable genes as `p = 1` instead of dropping them.
    #[arg(long)]
    pub impute_na: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = GeneratorArg::Model)]
    pub generator: GeneratorArg,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat `key=value` simulation settings; entries override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Also write `report.html`.
    #[arg(long)]
    pub html: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    Model,
    Mixture,
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("inputs").required(true).multiple(true).args(["results", "prior", "curves", "rates"])))]
pub struct ReportArgs {
    /// Results CSV written by `test`.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Prior file written by `fit`.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Curves CSV written by `simulate`.
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// Rates CSV written by `simulate`.
    #[arg(long)]
    pub rates: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long, value_enum, default_value_t = Toggle::Auto)]
    pub gene_links: Toggle,
    #[arg(long)]
    pub link_template: Option<String>,
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::Layout(_)
        | Error::DuplicateGene(_)
        | Error::VersionMismatch { .. } => 1,
        Error::Admissibility(_)
        | Error::RankDeficiency { .. }
        | Error::DimensionMismatch { .. }
        | Error::TooFewGenes { .. } => 2,
        Error::NonConvergence { .. } => 3,
        _ => 4,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Messages go to stderr.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Report(a) => cmd_report(a),
    }
}

/// Null hypothesis as requested on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    Named(ContrastKind),
    File(PathBuf, Contrast),
}

impl Hypothesis {
    /// Named hypotheses are recognised first; anything else is read as a
    /// contrast matrix file.
    pub fn resolve(h0: &str) -> Result<Self> {
        match h0.parse::<ContrastKind>() {
            Ok(k) if k != ContrastKind::Custom => Ok(Hypothesis::Named(k)),
            _ => {
                let path = PathBuf::from(h0);
                let m = read_matrix(&path)?;
                Ok(Hypothesis::File(path, Contrast::custom(m)?))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Hypothesis::Named(k) => k.as_str().to_string(),
            Hypothesis::File(..) => ContrastKind::Custom.as_str().to_string(),
        }
    }

    pub fn contrast(&self, d: usize) -> Result<Contrast> {
        match self {
            Hypothesis::Named(k) => make_contrast(*k, d),
            Hypothesis::File(path, c) => {
                if c.dim() != d {
                    return Err(Error::Admissibility(format!(
                        "contrast in {} has {} columns but the data have {d} conditions",
                        path.display(),
                        c.dim()
                    )));
                }
                Ok(c.clone())
            }
        }
    }
}

/// Admissibility of a request for `n` replicates of `d` conditions. Checked
/// before any fitting or testing.
pub fn check_admissible(
    var: VarStruct,
    h0: &Hypothesis,
    method: Method,
    n: usize,
    d: usize,
) -> Result<()> {
    let fail = |rule: &str| Err(Error::Admissibility(format!("{rule} (n = {n}, d = {d})")));
    match (var, method) {
        (VarStruct::Simple, Method::ShHT2) => {
            return fail("ShHT2 needs the general variance structure")
        }
        (VarStruct::General, Method::ShUT2) => {
            return fail("ShUT2 needs the simple variance structure")
        }
        _ => {}
    }
    if n <= 1 {
        return fail("at least two replicates are needed (n > 1)");
    }
    if let Hypothesis::Named(ContrastKind::NoTrend) = h0 {
        if d <= 2 {
            return fail("no.trend needs more than two conditions (d > 2)");
        }
    }
    let rank = match h0 {
        Hypothesis::Named(ContrastKind::ZeroMeans) => d,
        Hypothesis::Named(ContrastKind::EqualMeans) => d.saturating_sub(1),
        Hypothesis::Named(_) => 1,
        Hypothesis::File(_, c) => c.rank(),
    };
    if rank == 0 {
        return fail("the hypothesis constrains nothing with a single condition");
    }
    let needs_rank_rule = var == VarStruct::General || method == Method::HT2;
    if needs_rank_rule && n <= rank {
        let rule = match h0 {
            Hypothesis::Named(ContrastKind::ZeroMeans) => {
                "zero.means under the general structure needs n > d; a test of the zero means null using the ShHT2 statistic is not possible"
            }
            Hypothesis::Named(ContrastKind::EqualMeans) => "equal.means under the general structure needs n > d - 1",
            _ => "the general structure needs more replicates than the contrast rank",
        };
        return fail(rule);
    }
    Ok(())
}

/// Flags merged with the optional config file.
#[derive(Debug, Clone)]
struct Settings {
    layout: Option<String>,
    var_struct: VarStruct,
    h0: String,
    fdr: f64,
    method: Option<String>,
    prior: Option<PathBuf>,
    hotelling_df: HotellingDf,
    na: NaPolicy,
    link_template: Option<String>,
    fit: FitConfig,
}

const SETTING_KEYS: &[&str] = &[
    "layout",
    "var_struct",
    "h0",
    "fdr",
    "method",
    "prior",
    "hotelling_df",
    "na",
    "link_template",
    "fit.max_iter",
    "fit.rel_tol",
    "fit.step_tol",
    "fit.grad_tol",
    "fit.min_genes",
];

impl Settings {
    fn from_data(data: &DataArgs) -> Self {
        Settings {
            layout: data.layout.clone(),
            var_struct: data.var_struct,
            h0: data.h0.clone(),
            fdr: 0.1,
            method: None,
            prior: None,
            hotelling_df: HotellingDf::Classical,
            na: NaPolicy::Drop,
            link_template: None,
            fit: FitConfig::default(),
        }
    }

    fn from_test(a: &TestArgs) -> Self {
        Settings {
            fdr: a.fdr,
            method: a.method.clone(),
            prior: a.prior.clone(),
            hotelling_df: match a.hotelling_df {
                DfChoice::Classical => HotellingDf::Classical,
                DfChoice::Published => HotellingDf::AsPublished,
            },
            na: if a.impute_na {
                NaPolicy::ImputeOne
            } else {
                NaPolicy::Drop
            },
            link_template: a.link_template.clone(),
            ..Settings::from_data(&a.data)
        }
    }

    fn overlay(mut self, path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(self) };
        let kv = KvFile::read(path)?;
        if let Some(k) = kv.unknown_keys(SETTING_KEYS).first() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: kv.entry(k).map_or(0, |e| e.line),
                column: 1,
                message: format!("unknown key '{k}'"),
            });
        }
        if let Some(v) = kv.get("layout") {
            self.layout = Some(v.to_string());
        }
        if let Some(v) = kv.get("var_struct") {
            self.var_struct = VarStruct::parse(v)?;
        }
        if let Some(v) = kv.get("h0") {
            self.h0 = v.to_string();
        }
        if let Some(v) = kv.parsed("fdr")? {
            self.fdr = v;
        }
        if let Some(v) = kv.get("method") {
            self.method = Some(v.to_string());
        }
        if let Some(v) = kv.get("prior") {
            self.prior = Some(PathBuf::from(v));
        }
        if let Some(v) = kv.get("hotelling_df") {
            self.hotelling_df = match v {
                "classical" => HotellingDf::Classical,
                "published" => HotellingDf::AsPublished,
                other => return Err(Error::domain(format!("unknown hotelling_df '{other}'"))),
            };
        }
        if let Some(v) = kv.get("na") {
            self.na = match v {
                "drop" => NaPolicy::Drop,
                "impute" => NaPolicy::ImputeOne,
                other => return Err(Error::domain(format!("unknown na policy '{other}'"))),
            };
        }
        if let Some(v) = kv.get("link_template") {
            self.link_template = Some(v.to_string());
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
        Ok(self)
    }

    fn method(&self) -> Result<Method> {
        match &self.method {
            Some(m) => m.parse(),
            None => Ok(match self.var_struct {
                VarStruct::General => Method::ShHT2,
                VarStruct::Simple => Method::ShUT2,
            }),
        }
    }
}

struct Prepared {
    dataset: ExpressionDataset,
    samples: Vec<GeneSample>,
    skipped: Vec<(String, String)>,
    contrast: Contrast,
    hypothesis: String,
}

fn prepare(data: &DataArgs, settings: &Settings, method: Method) -> Result<Prepared> {
    let layout = settings.layout.as_deref().map(Layout::parse).transpose()?;
    let dataset = parse_dataset(&data.input, layout.as_ref())?;
    let h0 = Hypothesis::resolve(&settings.h0)?;
    let (n, d) = (dataset.replicates, dataset.conditions);
    check_admissible(settings.var_struct, &h0, method, n, d)?;
    let contrast = h0.contrast(d)?;
    let split = to_gene_samples(&dataset);
    Ok(Prepared {
        samples: split.samples,
        skipped: split.skipped,
        contrast,
        hypothesis: h0.name(),
        dataset,
    })
}

fn fit_prior(p: &Prepared, var: VarStruct, config: &FitConfig) -> Result<FitReport> {
    let space = contrast_space(&p.samples, &p.contrast)?;
    match var {
        VarStruct::General => fit_wishart_prior(&space, config),
        VarStruct::Simple => fit_simple_prior(&space, config),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn diagnostics_text(report: &FitReport, p: &Prepared, var: VarStruct) -> String {
    let mut s = format!(
        "structure: {}\nhypothesis: {} (rank {})\nlog-likelihood: {}\niterations: {}\nconverged: {}\n\
         gradient norm: {:e}\ngenes used: {}\n",
        match var {
            VarStruct::General => "general",
            VarStruct::Simple => "simple",
        },
        p.hypothesis,
        p.contrast.rank(),
        report.loglik,
        report.iterations,
        report.converged,
        report.grad_norm,
        report.genes_used
    );
    s.push_str(&format!("excluded genes: {}\n", report.excluded.len()));
    for g in &report.excluded {
        s.push_str(&format!("  {g}\n"));
    }
    s.push_str(&format!("skipped genes: {}\n", p.skipped.len()));
    for (g, why) in &p.skipped {
        s.push_str(&format!("  {g}: {why}\n"));
    }
    s
}

pub fn cmd_fit(a: &FitArgs) -> Result<()> {
    let settings = Settings::from_data(&a.data).overlay(a.data.config.as_deref())?;
    let method = match settings.var_struct {
        VarStruct::General => Method::ShHT2,
        VarStruct::Simple => Method::ShUT2,
    };
    let p = prepare(&a.data, &settings, method)?;
    let report = fit_prior(&p, settings.var_struct, &settings.fit)?;
    ensure_dir(&a.data.out_dir)?;
    let prior_path = a.data.out_dir.join("prior.txt");
    save_prior(
        &PriorFile::from_fit(&report, p.contrast.rank(), &p.hypothesis),
        &prior_path,
    )?;
    write_file(
        &a.data.out_dir.join("fit_diagnostics.txt"),
        &diagnostics_text(&report, &p, settings.var_struct),
    )?;
    eprintln!("wrote {}", prior_path.display());
    if !report.converged {
        return Err(Error::NonConvergence {
            iterations: report.iterations,
        });
    }
    Ok(())
}

fn load_matching_prior(
    path: &Path,
    method: Method,
    rank: usize,
    hypothesis: &str,
) -> Result<Prior> {
    let file = load_prior(path)?;
    check_prior_dim(&file, rank)?;
    let ok = matches!(
        (method, &file.prior),
        (Method::ShHT2, Prior::Wishart(_)) | (Method::ShUT2, Prior::Simple(_))
    );
    if !ok {
        return Err(Error::Admissibility(format!(
            "{} holds a prior of the wrong kind for {method}",
            path.display()
        )));
    }
    if file.contrast != hypothesis {
        eprintln!(
            "warning: prior was fitted under {} but the test uses {hypothesis}",
            file.contrast
        );
    }
    Ok(file.prior)
}

fn links_enabled(toggle: Toggle, auto: bool) -> bool {
    match toggle {
        Toggle::Auto => auto,
        Toggle::On => true,
        Toggle::Off => false,
    }
}

pub fn cmd_test(a: &TestArgs) -> Result<()> {
    let settings = Settings::from_test(a).overlay(a.data.config.as_deref())?;
    let method = settings.method()?;
    let p = prepare(&a.data, &settings, method)?;
    let prior = if method.needs_prior() {
        Some(match &settings.prior {
            Some(path) => load_matching_prior(path, method, p.contrast.rank(), &p.hypothesis)?,
            None => {
                let report = fit_prior(&p, settings.var_struct, &settings.fit)?;
                if !report.converged {
                    return Err(Error::NonConvergence {
                        iterations: report.iterations,
                    });
                }
                report.prior
            }
        })
    } else {
        None
    };
    let options = TestOptions {
        hotelling_df: settings.hotelling_df,
    };
    let run = run_tests(&p.samples, method, &p.contrast, prior.as_ref(), &options)?;
    let bh = bh_table(&run.results, settings.fdr, settings.na)?;
    let mut table = ResultsTable::assemble(
        method.as_str(),
        &p.hypothesis,
        p.dataset.condition_names.clone(),
        &bh,
        &run.results,
        &p.samples,
        &p.skipped,
    );
    table.gene_symbols = metadata_has_symbols(&p.dataset.metadata);
    ensure_dir(&a.data.out_dir)?;
    write_file(&a.data.out_dir.join("results.csv"), &table.to_csv())?;
    if a.html {
        let options = ReportOptions {
            title: format!("{method} gene list"),
            gene_links: links_enabled(a.gene_links, table.gene_symbols),
            link_template: settings
                .link_template
                .clone()
                .unwrap_or_else(|| crate::report::DEFAULT_LINK_TEMPLATE.to_string()),
        };
        let inputs = ReportInputs {
            results: Some(&table),
            ..Default::default()
        };
        write_file(
            &a.data.out_dir.join("results.html"),
            &render_report(&inputs, &options),
        )?;
    }
    eprintln!(
        "{} significant of {} genes at FDR {}",
        table.n_significant(),
        table.rows.len(),
        settings.fdr
    );
    Ok(())
}

/// Effective simulation settings: preset for the generator, then flags,
/// then the config file.
pub fn simulation_config(a: &SimulateArgs) -> Result<SimConfig> {
    let mut config = match a.generator {
        GeneratorArg::Model => SimConfig::paper_model(),
        GeneratorArg::Mixture => SimConfig::paper_mixture(),
    };
    if let Some(r) = a.reps {
        config.reps = r;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(path) = &a.config {
        config = config.overlay(&KvFile::read(path)?)?;
    }
    config.validate()?;
    Ok(config)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let config = simulation_config(a)?;
    ensure_dir(&a.out_dir)?;
    write_file(&a.out_dir.join("config.txt"), &config.to_kv())?;
    let mut done = Vec::new();
    let outcome = run_benchmark_with(&config, |rep, record| {
        eprintln!(
            "replicate {}/{}{}",
            rep + 1,
            config.reps,
            record
                .excluded
                .as_deref()
                .map(|r| format!(" excluded: {r}"))
                .unwrap_or_default()
        );
        done.push(record.clone());
    });
    let summary = match outcome {
        Ok(s) => s,
        Err(e) => {
            let partial = SimSummary {
                theta: f64::NAN,
                rows: Vec::new(),
                curves: Vec::new(),
                replicates: done,
            };
            write_file(&a.out_dir.join("replicates.csv"), &replicates_csv(&partial))?;
            let manifest = format!(
                "status: failed\nerror: {e}\ncompleted replicates: {}\nrequested replicates: {}\n\
                 generator: {}\nseed: {}\n",
                partial.replicates.len(),
                config.reps,
                config.generator.as_str(),
                config.seed
            );
            write_file(&a.out_dir.join("failure.txt"), &manifest)?;
            return Err(e);
        }
    };
    write_file(&a.out_dir.join("rates.csv"), &rates_csv(&summary))?;
    write_file(&a.out_dir.join("curves.csv"), &curves_csv(&summary))?;
    write_file(&a.out_dir.join("replicates.csv"), &replicates_csv(&summary))?;
    let curves = summary_curves(&summary);
    write_file(&a.out_dir.join("curves.svg"), &curves_svg(&curves))?;
    if a.html {
        let caption = rates_caption(&summary, &config);
        let inputs = ReportInputs {
            rates: Some(&summary.rows),
            rates_caption: Some(caption),
            curves: Some(&curves),
            ..Default::default()
        };
        let options = ReportOptions {
            title: format!("Simulation ({} generator)", config.generator.as_str()),
            ..Default::default()
        };
        write_file(
            &a.out_dir.join("report.html"),
            &render_report(&inputs, &options),
        )?;
    }
    eprintln!(
        "{} of {} replicates used; outputs in {}",
        summary.used_replicates(),
        summary.replicates.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn rates_caption(summary: &SimSummary, config: &SimConfig) -> String {
    format!(
        "{} genes, {} shifted, effect size {}; {} of {} replicates used",
        config.genes,
        config.true_positives,
        summary.theta,
        summary.used_replicates(),
        summary.replicates.len()
    )
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn cmd_report(a: &ReportArgs) -> Result<()> {
    let results = a.results.as_deref().map(read_results).transpose()?;
    let prior = a.prior.as_deref().map(load_prior).transpose()?;
    let curves = match &a.curves {
        Some(p) => Some(parse_curves_csv(&read_text(p)?, p)?),
        None => None,
    };
    let rates = match &a.rates {
        Some(p) => Some(parse_rates_csv(&read_text(p)?, p)?),
        None => None,
    };
    let symbols = results.as_ref().is_some_and(|t| t.gene_symbols);
    let options = ReportOptions {
        title: a
            .title
            .clone()
            .unwrap_or_else(|| ReportOptions::default().title),
        gene_links: links_enabled(a.gene_links, symbols),
        link_template: a
            .link_template
            .clone()
            .unwrap_or_else(|| crate::report::DEFAULT_LINK_TEMPLATE.to_string()),
    };
    let inputs = ReportInputs {
        results: results.as_ref(),
        prior: prior.as_ref(),
        rates: rates.as_deref(),
        rates_caption: None,
        curves: curves.as_deref(),
    };
    ensure_dir(&a.out_dir)?;
    let out = a.out_dir.join("report.html");
    write_file(&out, &render_report(&inputs, &options))?;
    eprintln!("wrote {}", out.display());
    Ok(())
}
