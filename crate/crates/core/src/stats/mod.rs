//! Per-gene test statistics.

mod contrast;
mod run;
mod statistic;

pub use contrast::{apply_contrast, make_contrast, Contrast, ContrastKind, RANK_TOL};
pub use run::{contrast_space, run_tests, Diagnostic, TestOptions, TestRun};
pub use statistic::{ht2, ht2_with_df, sh_ht2, sh_ut2, ut2, HotellingDf, Method, TestResult};
