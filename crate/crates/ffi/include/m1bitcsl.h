#ifndef M1BITCSL_H
#define M1BITCSL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum M1Status {
  M1_STATUS_OK = 0,
  M1_STATUS_NULL_POINTER = 1,
  M1_STATUS_DIMENSION_MISMATCH = 2,
  M1_STATUS_INVALID_PARAMETER = 3,
  M1_STATUS_INVALID_DATASET = 4,
  M1_STATUS_FACTORIZATION = 5,
  M1_STATUS_DIVERGENCE = 6,
  M1_STATUS_CALIBRATION = 7,
  M1_STATUS_CONFIG = 8,
  M1_STATUS_IO = 9,
  M1_STATUS_PANIC = 10,
} M1Status;

/*
 Sparsity penalty selector for [`m1_solve`].
 */
typedef enum M1Penalty {
  M1_PENALTY_L1 = 0,
  M1_PENALTY_L0 = 1,
  M1_PENALTY_MCP = 2,
  M1_PENALTY_SORTED_L1 = 3,
} M1Penalty;

/*
 Opaque dataset handle.
 */
typedef struct M1Dataset M1Dataset;

/*
 Opaque solver-result handle.
 */
typedef struct M1Result M1Result;

/*
 ADMM settings. Obtain defaults from [`m1_solver_config_default`].
 */
typedef struct M1SolverConfig {
  double gamma;
  /*
   Ball radius C; `INFINITY` disables the constraint.
   */
  double ball_radius;
  double rho;
  double eps_abs;
  double eps_rel;
  size_t max_iter;
  bool adaptive_rho;
} M1SolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len - 1` bytes). Returns the full message length.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
size_t m1_last_error(char *buf, size_t len);

struct M1SolverConfig m1_solver_config_default(void);

/*
 Builds a dataset from the full `m x n` matrix `phi` (row-major) and the
 clipped measurements `y`; rows at `y_min` or `y_max` are the saturated ones.

 # Safety
 `phi` must hold `m * n` values, `y` must hold `m`, `out` must be writable.
 */
enum M1Status m1_dataset_new(const double *phi,
                             const double *y,
                             size_t m,
                             size_t n,
                             double y_min,
                             double y_max,
                             struct M1Dataset **out);

/*
 Loads a dataset directory written by the command-line tool.

 # Safety
 `path` must be a NUL-terminated string, `out` must be writable.
 */
enum M1Status m1_dataset_load(const char *path, struct M1Dataset **out);

/*
 Synthesizes one benchmark instance: K-sparse unit-norm signal, Gaussian
 matrix, noise at variance ratio `noise_level`, `round(saturation_ratio * m)`
 saturated rows. The true signal is written to `x_bar` (length `n`).

 # Safety
 `x_bar` must be null or hold `n` writable values; `out` must be writable.
 */
enum M1Status m1_synthesize(size_t n,
                            size_t m,
                            size_t k,
                            double noise_level,
                            double saturation_ratio,
                            uint64_t seed,
                            uint64_t trial,
                            double *x_bar,
                            struct M1Dataset **out);

/*
 Writes N, M1 and M2 of a dataset; any output pointer may be null.

 # Safety
 `ds` must be a live handle.
 */
enum M1Status m1_dataset_dims(const struct M1Dataset *ds, size_t *n, size_t *m1, size_t *m2);

/*
 # Safety
 `ds` must be null or a handle not yet freed.
 */
void m1_dataset_free(struct M1Dataset *ds);

/*
 Runs the ADMM solver with the chosen penalty. `param` is the MCP shape
 `b` (ignored otherwise); `weights`/`n_weights` are the sorted-L1 weights,
 nonincreasing, where index 0 applies to the smallest magnitude.

 # Safety
 `ds` must be a live handle, `config` null (defaults) or valid, `weights`
 must hold `n_weights` values, `out` must be writable.
 */
enum M1Status m1_solve(const struct M1Dataset *ds,
                       enum M1Penalty penalty,
                       double nu,
                       double param,
                       const double *weights,
                       size_t n_weights,
                       const struct M1SolverConfig *config,
                       struct M1Result **out);

/*
 LASSO on the unsaturated rows only (saturation rejection).

 # Safety
 `ds` must be a live handle, `config` null (defaults) or valid, `out` writable.
 */
enum M1Status m1_solve_lasso(const struct M1Dataset *ds,
                             double nu,
                             const struct M1SolverConfig *config,
                             struct M1Result **out);

/*
 Length of the estimate (0 for a null handle).

 # Safety
 `res` must be null or a live handle.
 */
size_t m1_result_len(const struct M1Result *res);

/*
 Copies the estimate into `x`, which must hold `len` values with
 `len == m1_result_len(res)`.

 # Safety
 `res` must be a live handle and `x` must hold `len` writable values.
 */
enum M1Status m1_result_copy_x(const struct M1Result *res, double *x, size_t len);

/*
 Writes iteration count, convergence flag and wall time; any output
 pointer may be null.

 # Safety
 `res` must be a live handle.
 */
enum M1Status m1_result_info(const struct M1Result *res,
                             size_t *iterations,
                             bool *converged,
                             double *wall_time);

/*
 # Safety
 `res` must be null or a handle not yet freed.
 */
void m1_result_free(struct M1Result *res);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* M1BITCSL_H */
