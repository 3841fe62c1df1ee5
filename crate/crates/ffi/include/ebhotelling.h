#ifndef EBHOTELLING_H
#define EBHOTELLING_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define EBH_H0_ZERO_MEANS 0

#define EBH_H0_EQUAL_MEANS 1

#define EBH_H0_NO_TREND 2

#define EBH_METHOD_SHHT2 0

#define EBH_METHOD_HT2 1

#define EBH_METHOD_SHUT2 2

#define EBH_METHOD_UT2 3

typedef enum {
  EBH_STATUS_OK = 0,
  EBH_STATUS_NULL_POINTER = 1,
  EBH_STATUS_INVALID_ARGUMENT = 2,
  EBH_STATUS_NOT_POSITIVE_DEFINITE = 3,
  EBH_STATUS_DIMENSION_MISMATCH = 4,
  EBH_STATUS_INADMISSIBLE = 5,
  EBH_STATUS_NON_CONVERGENCE = 6,
  EBH_STATUS_NO_ROOT = 7,
  EBH_STATUS_PARSE = 8,
  EBH_STATUS_IO = 9,
  EBH_STATUS_PANIC = 10,
} EbhStatus;

/**
 * Genes with their complete replicates.
 */
typedef struct EbhDataset EbhDataset;

/**
 * A fitted or user-supplied prior together with the hypothesis whose
 * coordinates it lives in.
 */
typedef struct EbhPrior EbhPrior;

typedef struct EbhResults EbhResults;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *ebh_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ebh_version(void);

/**
 * Builds a dataset from a `genes x (replicates * conditions)` row-major
 * matrix; within a row the values of replicate 1 come first. NaN marks a
 * missing value, and a replicate is kept only when all its conditions are
 * present. Genes with fewer than two complete replicates are dropped.
 *
 * # Safety
 * `values` must point to `genes * replicates * conditions` doubles and
 * `out` to writable storage for one handle.
 */
EbhStatus ebh_dataset_new(const double *values,
                          size_t genes,
                          size_t replicates,
                          size_t conditions,
                          EbhDataset **out_dataset);

/**
 * Number of genes with at least two complete replicates.
 *
 * # Safety
 * `dataset` must be a live handle or null.
 */
size_t ebh_dataset_len(const EbhDataset *dataset);

/**
 * # Safety
 * `dataset` must come from [`ebh_dataset_new`] and not be used afterwards.
 */
void ebh_dataset_free(EbhDataset *dataset);

/**
 * Fits the inverse-Wishart prior under hypothesis `h0` (an `EBH_H0_*`
 * code). A fit that stops before converging still returns a prior; check
 * [`ebh_prior_converged`].
 *
 * # Safety
 * `dataset` must be a live handle and `out_prior` writable.
 */
EbhStatus ebh_fit_wishart(const EbhDataset *dataset, uint32_t h0, EbhPrior **out_prior);

/**
 * Fits the scalar inverse-gamma prior under hypothesis `h0`.
 *
 * # Safety
 * As for [`ebh_fit_wishart`].
 */
EbhStatus ebh_fit_simple(const EbhDataset *dataset, uint32_t h0, EbhPrior **out_prior);

/**
 * Inverse-Wishart prior from a row-major `dim x dim` scale matrix, for use
 * with hypothesis `h0` (whose rank must equal `dim`).
 *
 * # Safety
 * `lambda` must point to `dim * dim` doubles and `out_prior` be writable.
 */
EbhStatus ebh_prior_new_wishart(const double *lambda,
                                size_t dim,
                                double nu,
                                uint32_t h0,
                                EbhPrior **out_prior);

/**
 * Dimension of the space the prior lives in.
 *
 * # Safety
 * `prior` must be a live handle or null.
 */
size_t ebh_prior_dim(const EbhPrior *prior);

/**
 * # Safety
 * `prior` must be a live handle or null.
 */
bool ebh_prior_converged(const EbhPrior *prior);

/**
 * Maximised marginal log-likelihood (NaN for user-supplied priors).
 *
 * # Safety
 * `prior` must be a live handle or null.
 */
double ebh_prior_loglik(const EbhPrior *prior);

/**
 * Degrees of freedom and row-major scale matrix of an inverse-Wishart
 * prior. `lambda_len` must be at least `dim * dim`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
EbhStatus ebh_prior_wishart_params(const EbhPrior *prior,
                                   double *out_nu,
                                   double *out_lambda,
                                   size_t lambda_len);

/**
 * Rate and shape of a scalar inverse-gamma prior.
 *
 * # Safety
 * Pointers must be valid.
 */
EbhStatus ebh_prior_simple_params(const EbhPrior *prior, double *out_rate, double *out_shape);

/**
 * # Safety
 * `prior` must come from this library and not be used afterwards.
 */
void ebh_prior_free(EbhPrior *prior);

/**
 * Scores every gene with `method` (an `EBH_METHOD_*` code) under `h0`.
 * Results follow the input rows, dropped genes included.
 * `prior` may be null for the methods that need none; otherwise it must
 * have been fitted under the same hypothesis.
 *
 * # Safety
 * Handles must be live and `out_results` writable.
 */
EbhStatus ebh_test(const EbhDataset *dataset,
                   const EbhPrior *prior,
                   uint32_t method_code,
                   uint32_t h0,
                   EbhResults **out_results);

/**
 * # Safety
 * `results` must be a live handle or null.
 */
size_t ebh_results_len(const EbhResults *results);

/**
 * Statistic, degrees of freedom and p-value of input row `index`.
 * Untestable genes report NaN.
 *
 * # Safety
 * Pointers must be valid.
 */
EbhStatus ebh_results_get(const EbhResults *results,
                          size_t index,
                          double *out_statistic,
                          double *out_df1,
                          double *out_df2,
                          double *out_pvalue);

/**
 * Copies all p-values in input row order; `len` must equal the result count.
 *
 * # Safety
 * `out_pvalues` must hold `len` doubles.
 */
EbhStatus ebh_results_pvalues(const EbhResults *results, double *out_pvalues, size_t len);

/**
 * # Safety
 * `results` must come from [`ebh_test`] and not be used afterwards.
 */
void ebh_results_free(EbhResults *results);

/**
 * Benjamini-Hochberg step-up selection; writes 1 for selected p-values and
 * 0 otherwise. NaN p-values are never selected.
 *
 * # Safety
 * `pvalues` and `out_mask` must each hold `len` elements.
 */
EbhStatus ebh_bh_select(const double *pvalues, size_t len, double fdr, uint8_t *out_mask);

/**
 * Effect multiplier giving the requested power of the level-`alpha` F test
 * with noncentrality `multiplier * theta`.
 *
 * # Safety
 * `out_theta` must be writable.
 */
EbhStatus ebh_solve_theta(double power,
                          double alpha,
                          double df1,
                          double df2,
                          double multiplier,
                          double *out_theta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EBHOTELLING_H */
