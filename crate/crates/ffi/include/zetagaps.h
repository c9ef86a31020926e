#ifndef ZETAGAPS_H
#define ZETAGAPS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
typedef enum ZgStatus {
  ZG_STATUS_OK = 0,
  ZG_STATUS_DOMAIN = 1,
  ZG_STATUS_ARGUMENT = 2,
  ZG_STATUS_PARSE = 3,
  ZG_STATUS_VALIDATION = 4,
  ZG_STATUS_EMPTY_INPUT = 5,
  ZG_STATUS_COVERAGE = 6,
  ZG_STATUS_CONVERGENCE = 7,
  ZG_STATUS_NUMERIC = 8,
  ZG_STATUS_POLE = 9,
  ZG_STATUS_DEGENERATE_INTERVAL = 10,
  ZG_STATUS_INTEGRITY = 11,
  ZG_STATUS_FETCH = 12,
  ZG_STATUS_IO = 13,
  ZG_STATUS_NULL_POINTER = 14,
  ZG_STATUS_PANIC = 15,
} ZgStatus;

/**
 * Opaque handle to an immutable ordinate table.
 */
typedef struct ZgTable ZgTable;

/**
 * Run counts at one height.
 */
typedef struct ZgRunSummary {
  size_t n_total;
  size_t n_runs;
} ZgRunSummary;

/**
 * Critical point between `γ_n` and `γ_{n+1}`.
 */
typedef struct ZgCriticalPoint {
  size_t n;
  double gamma_star;
  double left;
  double right;
  double residual;
} ZgCriticalPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after success.
 * The pointer stays valid until the next library call on this thread.
 */
const char *zg_last_error_message(void);

/**
 * Builds a table from `n` nondecreasing positive ordinates.
 *
 * # Safety
 * `ordinates` must point to `n` readable doubles; `out` must be writable.
 */
enum ZgStatus zg_table_from_ordinates(const double *ordinates, size_t n, struct ZgTable **out);

/**
 * Loads a one-ordinate-per-line text table or a binary cache file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ZgStatus zg_table_load(const char *path, struct ZgTable **out);

/**
 * Releases a table. Null is ignored.
 *
 * # Safety
 * `table` must come from this library and not be used afterwards.
 */
void zg_table_free(struct ZgTable *table);

/**
 * Number of ordinates; 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t zg_table_len(const struct ZgTable *table);

/**
 * `N(t)`.
 *
 * # Safety
 * `table` must be a live handle; `out` writable.
 */
enum ZgStatus zg_count_upto(const struct ZgTable *table, double t, size_t *out);

/**
 * `S(t) = N(t) − main term`.
 *
 * # Safety
 * `table` must be a live handle; `out` writable.
 */
enum ZgStatus zg_s_of_t(const struct ZgTable *table, double t, double *out);

/**
 * `N(T)` and `N_r(T, c)`.
 *
 * # Safety
 * `table` must be a live handle; `out` writable.
 */
enum ZgStatus zg_count_runs(const struct ZgTable *table,
                            size_t r,
                            double c,
                            double t,
                            struct ZgRunSummary *out);

/**
 * `|S_1|, …, |S_r|` into `out[0..r]`; `out_len` must be at least `r`.
 *
 * # Safety
 * `table` must be a live handle; `out` must hold `out_len` writable slots.
 */
enum ZgStatus zg_partition_sj(const struct ZgTable *table,
                              size_t r,
                              double c,
                              double t,
                              size_t *out,
                              size_t out_len);

/**
 * Empirical pair correlation at `c` below height `t`.
 *
 * # Safety
 * `table` must be a live handle; `out` writable.
 */
enum ZgStatus zg_pair_correlation(const struct ZgTable *table, double c, double t, double *out);

/**
 * Fraction of `γ_n ≤ t` with `γ_{n+ell} − γ_n ≤ 2πc/log t`.
 *
 * # Safety
 * `table` must be a live handle; `out` writable.
 */
enum ZgStatus zg_neighbor_spacing_cdf(const struct ZgTable *table,
                                      size_t ell,
                                      double c,
                                      double t,
                                      double *out);

/**
 * `∫_T^{2T} (N(t + h) − N(t) − m)² dt`.
 *
 * # Safety
 * `table` must be a live handle; `out` writable.
 */
enum ZgStatus zg_variance_integral(const struct ZgTable *table,
                                   double t,
                                   double h,
                                   double m,
                                   double *out);

/**
 * Critical point between `γ_n` and `γ_{n+1}` (1-based `n`).
 *
 * # Safety
 * `table` must be a live handle; `out` writable.
 */
enum ZgStatus zg_find_gamma_star(const struct ZgTable *table,
                                 size_t n,
                                 double delta,
                                 double tol,
                                 struct ZgCriticalPoint *out);

/**
 * Pair-correlation integral `f(alpha)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ZgStatus zg_pair_correlation_f(double alpha, double tol, double *out);

/**
 * `c_r` with `f(c_r) = 1/r`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ZgStatus zg_solve_cr(uint32_t r, double tol, double *out);

/**
 * Sine-kernel gap probability `E(0; t)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ZgStatus zg_fredholm_det(double t, size_t quad_order, double *out);

/**
 * Sine-kernel nearest-neighbor spacing CDF at `c`.
 *
 * # Safety
 * `out` must be writable.
 */
enum ZgStatus zg_nn_cdf(double c, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZETAGAPS_H */
