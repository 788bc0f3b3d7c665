#ifndef ZEROLAB_H
#define ZEROLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ZlStatus {
  ZL_STATUS_OK = 0,
  ZL_STATUS_NULL_POINTER = 1,
  ZL_STATUS_INVALID_ARGUMENT = 2,
  ZL_STATUS_HYPOTHESIS = 3,
  ZL_STATUS_CONDITIONING = 4,
  ZL_STATUS_DEGENERATE_DRAW = 5,
  ZL_STATUS_ENDPOINT_DEGENERACY = 6,
  ZL_STATUS_NON_CONVERGENCE = 7,
  ZL_STATUS_DEGENERATE_ENSEMBLE = 8,
  ZL_STATUS_ERDOS_TURAN = 9,
  ZL_STATUS_IO = 10,
  ZL_STATUS_BUFFER_TOO_SMALL = 11,
  ZL_STATUS_OUT_OF_RANGE = 12,
  ZL_STATUS_PANIC = 13,
  ZL_STATUS_OTHER = 14,
} ZlStatus;

typedef struct ZlBasis ZlBasis;

typedef struct ZlEnsemble ZlEnsemble;

typedef struct ZlPolynomial ZlPolynomial;

typedef struct ZlRootSet ZlRootSet;

typedef struct ZlSweep ZlSweep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a success.
 * The pointer stays valid until the next zerolab call on the same thread.
 */
const char *zl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *zl_version(void);

/**
 * Builds a polynomial from `len` coefficients `c_0..c_{len-1}`. `im` may be null for real input.
 */
enum ZlStatus zl_polynomial_new(const double *re,
                                const double *im,
                                size_t len,
                                struct ZlPolynomial **result);

void zl_polynomial_free(struct ZlPolynomial *p);

enum ZlStatus zl_polynomial_degree(const struct ZlPolynomial *p, size_t *degree);

/**
 * Copies the coefficients; `len` receives `degree + 1` even when `cap` is too small.
 */
enum ZlStatus zl_polynomial_coeffs(const struct ZlPolynomial *p,
                                   double *re,
                                   double *im,
                                   size_t cap,
                                   size_t *len);

/**
 * Parses `family` or `family:param`, e.g. `"rademacher"` or `"bernoulli:0.3"`.
 */
enum ZlStatus zl_ensemble_parse(const char *name, struct ZlEnsemble **result);

void zl_ensemble_free(struct ZlEnsemble *e);

/**
 * Samples the Kac polynomial of trial `trial`, degree `n`, under `seed`, redrawing degenerate endpoints.
 */
enum ZlStatus zl_sample_polynomial(const struct ZlEnsemble *ensemble,
                                   size_t n,
                                   uint64_t seed,
                                   uint64_t trial,
                                   struct ZlPolynomial **result);

/**
 * Monomial basis of degree `n`.
 */
enum ZlStatus zl_basis_monomial(size_t n, struct ZlBasis **result);

/**
 * Orthonormal basis for `w(θ) = a_0 + Σ 2 a_j cos jθ` with `a = fourier[0..len]`.
 */
enum ZlStatus zl_basis_szego(const double *fourier, size_t len, size_t n, struct ZlBasis **result);

void zl_basis_free(struct ZlBasis *b);

/**
 * Coefficient `b_{j,k}` of `z^j` in `B_k`.
 */
enum ZlStatus zl_basis_entry(const struct ZlBasis *b, size_t j, size_t k, double *re, double *im);

enum ZlStatus zl_find_roots(const struct ZlPolynomial *p,
                            double tol,
                            size_t max_iter,
                            struct ZlRootSet **result);

void zl_roots_free(struct ZlRootSet *r);

enum ZlStatus zl_roots_get(const struct ZlRootSet *r,
                           double *re,
                           double *im,
                           size_t cap,
                           size_t *len);

enum ZlStatus zl_roots_reconstruction_error(const struct ZlRootSet *r, double *value);

/**
 * Certified interval `lo ≤ ‖P‖_∞ ≤ hi` on the unit circle.
 */
enum ZlStatus zl_sup_norm(const struct ZlPolynomial *p, size_t grid_factor, double *lo, double *hi);

enum ZlStatus zl_mahler_measure(const struct ZlPolynomial *p,
                                const struct ZlRootSet *r,
                                double *value);

/**
 * `|N(A_r(α, β))/n − (β − α)/2π|`.
 */
enum ZlStatus zl_sector_discrepancy(const struct ZlRootSet *r,
                                    double radius,
                                    double alpha,
                                    double beta,
                                    double *value);

/**
 * Per-sample Erdős–Turán right-hand side at sector parameter `radius`.
 */
enum ZlStatus zl_erdos_turan_rhs(const struct ZlPolynomial *p,
                                 const struct ZlRootSet *r,
                                 double radius,
                                 double *value);

/**
 * Bound reports for a monomial Kac polynomial of degree `n`, one JSON object per line.
 * `needed` receives the buffer size including the terminating NUL.
 */
enum ZlStatus zl_bounds_json(const struct ZlEnsemble *ensemble,
                             size_t n,
                             double t,
                             double r,
                             char *buf,
                             size_t cap,
                             size_t *needed);

/**
 * Runs a sweep described by configuration text (the same format as the CLI's `--config` files).
 * `threads = 0` uses all cores.
 */
enum ZlStatus zl_sweep_run(const char *config_text, size_t threads, struct ZlSweep **result);

void zl_sweep_free(struct ZlSweep *s);

enum ZlStatus zl_sweep_rows(const struct ZlSweep *s, size_t *rows);

/**
 * Degree, mean discrepancy and standard error of row `i`.
 */
enum ZlStatus zl_sweep_row(const struct ZlSweep *s,
                           size_t i,
                           size_t *n,
                           double *mean,
                           double *stderr);

/**
 * Writes sweep.csv, records.csv, trials.csv and summary.json into `dir`.
 */
enum ZlStatus zl_sweep_export(const struct ZlSweep *s, const char *dir);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ZEROLAB_H */
