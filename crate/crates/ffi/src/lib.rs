//! C ABI over the ebhotelling library.
//!
//! Every fallible call returns an [`EbhStatus`]; on failure the message is
//! available from [`ebh_last_error_message`] on the same thread. Objects are
//! opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ebhotelling::matrix::{Matrix, SpdMatrix};
use ebhotelling::model::{
    fit_simple_prior, fit_wishart_prior, FitConfig, GeneSample, Prior, WishartPrior,
};
use ebhotelling::multiplicity::bh_select;
use ebhotelling::sim::solve_theta;
use ebhotelling::stats::{
    contrast_space, make_contrast, run_tests, ContrastKind, Method, TestOptions, TestResult,
};
use ebhotelling::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPositiveDefinite = 3,
    DimensionMismatch = 4,
    Inadmissible = 5,
    NonConvergence = 6,
    NoRoot = 7,
    Parse = 8,
    Io = 9,
    Panic = 10,
}

pub const EBH_H0_ZERO_MEANS: u32 = 0;
pub const EBH_H0_EQUAL_MEANS: u32 = 1;
pub const EBH_H0_NO_TREND: u32 = 2;

pub const EBH_METHOD_SHHT2: u32 = 0;
pub const EBH_METHOD_HT2: u32 = 1;
pub const EBH_METHOD_SHUT2: u32 = 2;
pub const EBH_METHOD_UT2: u32 = 3;

/// Genes with their complete replicates.
pub struct EbhDataset {
    samples: Vec<GeneSample>,
    // input row of each kept gene
    rows: Vec<usize>,
    genes: usize,
    dim: usize,
}

/// A fitted or user-supplied prior together with the hypothesis whose
/// coordinates it lives in.
pub struct EbhPrior {
    prior: Prior,
    hypothesis: u32,
    dim: usize,
    converged: bool,
    loglik: f64,
}

pub struct EbhResults {
    results: Vec<TestResult>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> EbhStatus {
    match e {
        Error::NotPositiveDefinite { .. } => EbhStatus::NotPositiveDefinite,
        Error::DimensionMismatch { .. } => EbhStatus::DimensionMismatch,
        Error::Admissibility(_) | Error::RankDeficiency { .. } | Error::TooFewGenes { .. } => {
            EbhStatus::Inadmissible
        }
        Error::NonConvergence { .. } => EbhStatus::NonConvergence,
        Error::NoRoot { .. } => EbhStatus::NoRoot,
        Error::Parse { .. }
        | Error::Layout(_)
        | Error::DuplicateGene(_)
        | Error::VersionMismatch { .. } => EbhStatus::Parse,
        Error::Io { .. } => EbhStatus::Io,
        Error::Domain(_) | Error::DegreesOfFreedom(_) | Error::DegenerateGene { .. } => {
            EbhStatus::InvalidArgument
        }
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EbhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EbhStatus::Ok,
        Ok(Err(Fail::Null(name))) => {
            set_error(&format!("null pointer: {name}"));
            EbhStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(&msg);
            EbhStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            EbhStatus::Panic
        }
    }
}

fn hypothesis(code: u32) -> Result<ContrastKind, Fail> {
    match code {
        EBH_H0_ZERO_MEANS => Ok(ContrastKind::ZeroMeans),
        EBH_H0_EQUAL_MEANS => Ok(ContrastKind::EqualMeans),
        EBH_H0_NO_TREND => Ok(ContrastKind::NoTrend),
        other => Err(Fail::Arg(format!("unknown hypothesis code {other}"))),
    }
}

fn method(code: u32) -> Result<Method, Fail> {
    match code {
        EBH_METHOD_SHHT2 => Ok(Method::ShHT2),
        EBH_METHOD_HT2 => Ok(Method::HT2),
        EBH_METHOD_SHUT2 => Ok(Method::ShUT2),
        EBH_METHOD_UT2 => Ok(Method::UT2),
        other => Err(Fail::Arg(format!("unknown method code {other}"))),
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ebh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ebh_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// Builds a dataset from a `genes x (replicates * conditions)` row-major
/// matrix; within a row the values of replicate 1 come first. NaN marks a
/// missing value, and a replicate is kept only when all its conditions are
/// present. Genes with fewer than two complete replicates are dropped.
///
/// # Safety
/// `values` must point to `genes * replicates * conditions` doubles and
/// `out` to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ebh_dataset_new(
    values: *const f64,
    genes: usize,
    replicates: usize,
    conditions: usize,
    out_dataset: *mut *mut EbhDataset,
) -> EbhStatus {
    guard(|| {
        let out_dataset = out(out_dataset, "out_dataset")?;
        *out_dataset = ptr::null_mut();
        if conditions == 0 {
            return Err(Fail::Arg("conditions must be positive".into()));
        }
        let width = replicates * conditions;
        let values = slice(values, genes * width, "values")?;
        let mut samples = Vec::with_capacity(genes);
        let mut rows = Vec::with_capacity(genes);
        for g in 0..genes {
            let row = &values[g * width..(g + 1) * width];
            let complete: Vec<Vec<f64>> = row
                .chunks(conditions)
                .filter(|rep| rep.iter().all(|v| v.is_finite()))
                .map(<[f64]>::to_vec)
                .collect();
            if complete.len() >= 2 {
                samples.push(GeneSample::from_rows(format!("g{g}"), &complete)?);
                rows.push(g);
            }
        }
        *out_dataset = Box::into_raw(Box::new(EbhDataset {
            samples,
            rows,
            genes,
            dim: conditions,
        }));
        Ok(())
    })
}

/// Number of genes with at least two complete replicates.
///
/// # Safety
/// `dataset` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ebh_dataset_len(dataset: *const EbhDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.samples.len())
}

/// # Safety
/// `dataset` must come from [`ebh_dataset_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ebh_dataset_free(dataset: *mut EbhDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

unsafe fn fit(
    dataset: *const EbhDataset,
    h0: u32,
    general: bool,
    out_prior: *mut *mut EbhPrior,
) -> EbhStatus {
    guard(|| {
        let out_prior = out(out_prior, "out_prior")?;
        *out_prior = ptr::null_mut();
        let ds = handle(dataset, "dataset")?;
        let c = make_contrast(hypothesis(h0)?, ds.dim)?;
        let space = contrast_space(&ds.samples, &c)?;
        let report = if general {
            fit_wishart_prior(&space, &FitConfig::default())?
        } else {
            fit_simple_prior(&space, &FitConfig::default())?
        };
        *out_prior = Box::into_raw(Box::new(EbhPrior {
            prior: report.prior,
            hypothesis: h0,
            dim: c.rank(),
            converged: report.converged,
            loglik: report.loglik,
        }));
        Ok(())
    })
}

/// Fits the inverse-Wishart prior under hypothesis `h0` (an `EBH_H0_*`
/// code). A fit that stops before converging still returns a prior; check
/// [`ebh_prior_converged`].
///
/// # Safety
/// `dataset` must be a live handle and `out_prior` writable.
#[no_mangle]
pub unsafe extern "C" fn ebh_fit_wishart(
    dataset: *const EbhDataset,
    h0: u32,
    out_prior: *mut *mut EbhPrior,
) -> EbhStatus {
    fit(dataset, h0, true, out_prior)
}

/// Fits the scalar inverse-gamma prior under hypothesis `h0`.
///
/// # Safety
/// As for [`ebh_fit_wishart`].
#[no_mangle]
pub unsafe extern "C" fn ebh_fit_simple(
    dataset: *const EbhDataset,
    h0: u32,
    out_prior: *mut *mut EbhPrior,
) -> EbhStatus {
    fit(dataset, h0, false, out_prior)
}

/// Inverse-Wishart prior from a row-major `dim x dim` scale matrix, for use
/// with hypothesis `h0` (whose rank must equal `dim`).
///
/// # Safety
/// `lambda` must point to `dim * dim` doubles and `out_prior` be writable.
#[no_mangle]
pub unsafe extern "C" fn ebh_prior_new_wishart(
    lambda: *const f64,
    dim: usize,
    nu: f64,
    h0: u32,
    out_prior: *mut *mut EbhPrior,
) -> EbhStatus {
    guard(|| {
        let out_prior = out(out_prior, "out_prior")?;
        *out_prior = ptr::null_mut();
        hypothesis(h0)?;
        let values = slice(lambda, dim * dim, "lambda")?.to_vec();
        let lambda = SpdMatrix::new(Matrix::from_row_major(dim, dim, values)?)?;
        *out_prior = Box::into_raw(Box::new(EbhPrior {
            prior: Prior::Wishart(WishartPrior::new(lambda, nu)?),
            hypothesis: h0,
            dim,
            converged: true,
            loglik: f64::NAN,
        }));
        Ok(())
    })
}

/// Dimension of the space the prior lives in.
///
/// # Safety
/// `prior` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ebh_prior_dim(prior: *const EbhPrior) -> usize {
    prior.as_ref().map_or(0, |p| p.dim)
}

/// # Safety
/// `prior` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ebh_prior_converged(prior: *const EbhPrior) -> bool {
    prior.as_ref().is_some_and(|p| p.converged)
}

/// Maximised marginal log-likelihood (NaN for user-supplied priors).
///
/// # Safety
/// `prior` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ebh_prior_loglik(prior: *const EbhPrior) -> f64 {
    prior.as_ref().map_or(f64::NAN, |p| p.loglik)
}

/// Degrees of freedom and row-major scale matrix of an inverse-Wishart
/// prior. `lambda_len` must be at least `dim * dim`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ebh_prior_wishart_params(
    prior: *const EbhPrior,
    out_nu: *mut f64,
    out_lambda: *mut f64,
    lambda_len: usize,
) -> EbhStatus {
    guard(|| {
        let p = handle(prior, "prior")?;
        let Prior::Wishart(w) = &p.prior else {
            return Err(Fail::Arg("prior is not inverse-Wishart".into()));
        };
        let m = w.lambda().matrix().as_slice();
        if lambda_len < m.len() {
            return Err(Fail::Arg(format!(
                "lambda buffer holds {lambda_len}, need {}",
                m.len()
            )));
        }
        *out(out_nu, "out_nu")? = w.nu();
        slice_mut(out_lambda, m.len(), "out_lambda")?.copy_from_slice(m);
        Ok(())
    })
}

/// Rate and shape of a scalar inverse-gamma prior.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ebh_prior_simple_params(
    prior: *const EbhPrior,
    out_rate: *mut f64,
    out_shape: *mut f64,
) -> EbhStatus {
    guard(|| {
        let p = handle(prior, "prior")?;
        let Prior::Simple(s) = &p.prior else {
            return Err(Fail::Arg("prior is not inverse-gamma".into()));
        };
        *out(out_rate, "out_rate")? = s.rate();
        *out(out_shape, "out_shape")? = s.shape();
        Ok(())
    })
}

/// # Safety
/// `prior` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ebh_prior_free(prior: *mut EbhPrior) {
    if !prior.is_null() {
        drop(Box::from_raw(prior));
    }
}

/// Scores every gene with `method` (an `EBH_METHOD_*` code) under `h0`.
/// Results follow the input rows, dropped genes included.
/// `prior` may be null for the methods that need none; otherwise it must
/// have been fitted under the same hypothesis.
///
/// # Safety
/// Handles must be live and `out_results` writable.
#[no_mangle]
pub unsafe extern "C" fn ebh_test(
    dataset: *const EbhDataset,
    prior: *const EbhPrior,
    method_code: u32,
    h0: u32,
    out_results: *mut *mut EbhResults,
) -> EbhStatus {
    guard(|| {
        let out_results = out(out_results, "out_results")?;
        *out_results = ptr::null_mut();
        let ds = handle(dataset, "dataset")?;
        let m = method(method_code)?;
        let c = make_contrast(hypothesis(h0)?, ds.dim)?;
        let prior = prior.as_ref();
        if let Some(p) = prior {
            if m.needs_prior() && p.hypothesis != h0 {
                return Err(Fail::Arg(
                    "prior was fitted under a different hypothesis".into(),
                ));
            }
        }
        let run = run_tests(
            &ds.samples,
            m,
            &c,
            prior.map(|p| &p.prior),
            &TestOptions::default(),
        )?;
        let mut results: Vec<TestResult> = (0..ds.genes)
            .map(|g| {
                TestResult::not_applicable(
                    &format!("g{g}"),
                    m,
                    "fewer than two complete replicates",
                )
            })
            .collect();
        for (row, r) in ds.rows.iter().zip(run.results) {
            results[*row] = r;
        }
        *out_results = Box::into_raw(Box::new(EbhResults { results }));
        Ok(())
    })
}

/// # Safety
/// `results` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ebh_results_len(results: *const EbhResults) -> usize {
    results.as_ref().map_or(0, |r| r.results.len())
}

/// Statistic, degrees of freedom and p-value of input row `index`.
/// Untestable genes report NaN.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ebh_results_get(
    results: *const EbhResults,
    index: usize,
    out_statistic: *mut f64,
    out_df1: *mut f64,
    out_df2: *mut f64,
    out_pvalue: *mut f64,
) -> EbhStatus {
    guard(|| {
        let r = handle(results, "results")?;
        let t = r
            .results
            .get(index)
            .ok_or_else(|| Fail::Arg(format!("index {index} out of range")))?;
        *out(out_statistic, "out_statistic")? = t.statistic;
        *out(out_df1, "out_df1")? = t.df1;
        *out(out_df2, "out_df2")? = t.df2;
        *out(out_pvalue, "out_pvalue")? = t.pvalue;
        Ok(())
    })
}

/// Copies all p-values in input row order; `len` must equal the result count.
///
/// # Safety
/// `out_pvalues` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ebh_results_pvalues(
    results: *const EbhResults,
    out_pvalues: *mut f64,
    len: usize,
) -> EbhStatus {
    guard(|| {
        let r = handle(results, "results")?;
        if len != r.results.len() {
            return Err(Fail::Arg(format!(
                "buffer holds {len}, have {} results",
                r.results.len()
            )));
        }
        let dst = slice_mut(out_pvalues, len, "out_pvalues")?;
        for (d, t) in dst.iter_mut().zip(&r.results) {
            *d = t.pvalue;
        }
        Ok(())
    })
}

/// # Safety
/// `results` must come from [`ebh_test`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ebh_results_free(results: *mut EbhResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

/// Benjamini-Hochberg step-up selection; writes 1 for selected p-values and
/// 0 otherwise. NaN p-values are never selected.
///
/// # Safety
/// `pvalues` and `out_mask` must each hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn ebh_bh_select(
    pvalues: *const f64,
    len: usize,
    fdr: f64,
    out_mask: *mut u8,
) -> EbhStatus {
    guard(|| {
        let p = slice(pvalues, len, "pvalues")?;
        let dst = slice_mut(out_mask, len, "out_mask")?;
        for (d, s) in dst.iter_mut().zip(bh_select(p, fdr)?) {
            *d = u8::from(s);
        }
        Ok(())
    })
}

/// Effect multiplier giving the requested power of the level-`alpha` F test
/// with noncentrality `multiplier * theta`.
///
/// # Safety
/// `out_theta` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebh_solve_theta(
    power: f64,
    alpha: f64,
    df1: f64,
    df2: f64,
    multiplier: f64,
    out_theta: *mut f64,
) -> EbhStatus {
    guard(|| {
        let dst = out(out_theta, "out_theta")?;
        *dst = solve_theta(power, alpha, df1, df2, multiplier)?;
        Ok(())
    })
}
