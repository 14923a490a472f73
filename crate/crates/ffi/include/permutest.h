/* C interface to the permutest goodness-of-fit library.
 *
 * Maintained by hand alongside crates/ffi/src/lib.rs; keep the two in sync
 * when extending the surface.
 */

#ifndef PERMUTEST_H
#define PERMUTEST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible entry point. */
typedef enum permutest_status {
  PERMUTEST_OK = 0,
  PERMUTEST_ERR_INVALID_ARGUMENT = 1,
  /* Tied reference values: use the degenerate path (handled automatically
   * by the test entry points; surfaced only by lower-level misuse). */
  PERMUTEST_ERR_DEGENERATE_NODES = 2,
  PERMUTEST_ERR_LENGTH_MISMATCH = 3,
  PERMUTEST_ERR_NOT_PROBABILITY_VECTOR = 4,
  PERMUTEST_ERR_INVALID_PARTITION = 5,
  PERMUTEST_ERR_INVALID_SHAPE = 6,
  PERMUTEST_ERR_EMPTY_SAMPLE = 7,
  PERMUTEST_ERR_INFEASIBLE_DISTANCE = 8,
  PERMUTEST_ERR_CONFIG = 9,
  PERMUTEST_ERR_NULL_POINTER = 90,
  PERMUTEST_ERR_PANIC = 99
} permutest_status;

/* Opaque handle over a finished test report. */
typedef struct PermutestReport permutest_report;

/* Gaussian-mean test: observation x (length k) against reference means mu
 * (length k) at noise precision n (covariance I/n). Degenerate (tied-mean)
 * references are routed automatically. On PERMUTEST_OK, *out owns a report
 * to be released with permutest_report_free. */
permutest_status permutest_test_gauss(const double *x, size_t k,
                                      const double *mu, double n,
                                      double alpha, permutest_report **out);

/* Categorical test: observed counts (length k) against reference cell
 * probabilities q (length k, each strictly inside (0,1), summing to 1). */
permutest_status permutest_test_cat(const uint64_t *counts, size_t k,
                                    const double *q, double alpha,
                                    permutest_report **out);

/* Two-sample test on count vectors of length k. lambda <= 0 selects the
 * default clustering threshold ln(sample size), applied per sample. */
permutest_status permutest_test_two_sample(const uint64_t *x,
                                           const uint64_t *y, size_t k,
                                           double alpha, double lambda,
                                           permutest_report **out);

/* 1 if the test rejected, 0 otherwise. */
int permutest_report_reject(const permutest_report *report);

/* Named statistic ("T", "T_f", "T_g") or p-value; NaN when absent. */
double permutest_report_statistic(const permutest_report *report,
                                  const char *name);
double permutest_report_p_value(const permutest_report *report,
                                const char *name);

/* Full report as a JSON document; release with permutest_string_free. */
char *permutest_report_json(const permutest_report *report);

void permutest_report_free(permutest_report *report);
void permutest_string_free(char *s);

/* Minimax-optimal threshold t* against a local alternative at scale delta,
 * and the total (Type-1 plus worst-case Type-2) error it attains. */
permutest_status permutest_threshold_gauss(size_t k, double delta,
                                           double *t_star,
                                           double *total_error);
permutest_status permutest_threshold_cat(size_t k, double delta,
                                         double *t_star, double *total_error);

/* Critical value of the (non)central chi-squared law:
 * P(X <= *out) = 1 - alpha. */
permutest_status permutest_chi2_critical(uint32_t df, double noncentrality,
                                         double alpha, double *out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PERMUTEST_H */
