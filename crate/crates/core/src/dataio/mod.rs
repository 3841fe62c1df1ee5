//! Reading expression matrices and reading/writing priors, results and
//! simulation outputs.

mod dataset;
pub mod kv;
mod prior_file;
mod results;

pub use dataset::{
    parse_dataset, parse_dataset_str, parse_matrix_str, read_matrix, to_gene_samples,
    ExpressionDataset, GeneSamples, Layout,
};
pub use prior_file::{check_prior_dim, load_prior, save_prior, PriorFile, PRIOR_FORMAT_VERSION};
pub use results::{
    curves_csv, parse_curves_csv, parse_rates_csv, rates_csv, read_results, replicates_csv,
    write_results, ResultRow, ResultsTable,
};

/// Compact round-trippable number for tables; undefined values print `NA`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NA".to_string()
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
