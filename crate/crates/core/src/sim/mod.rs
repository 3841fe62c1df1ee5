//! Simulation benchmark: synthetic datasets with a known set of shifted
//! genes and the resulting true/false discovery rates of each statistic.

mod benchmark;
mod config;
mod generate;
mod power;

pub use benchmark::{
    curve_on_grid, ordering_sweep, run_benchmark, run_benchmark_with, OrderingCurve, RateRow,
    ReplicateRecord, SimSummary, CURVE_STEP,
};
pub use config::{
    moment_matched_nu, surrogate_prior, Effect, Generator, Mixture, SimConfig, PAPER_MIXTURE,
    SURROGATE_CORRELATION,
};
pub use generate::{
    effect_theta, gen_dataset, gen_mixture_dataset, gen_model_dataset, gene_id, SimDataset,
};
pub use power::{designate_means, power_at, solve_theta, THETA_MAX};
