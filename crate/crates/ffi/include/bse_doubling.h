#ifndef BSE_DOUBLING_H
#define BSE_DOUBLING_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

enum BseStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  BSE_STATUS_OK = 0,
  BSE_STATUS_NULL_POINTER = 1,
  BSE_STATUS_INVALID_ARGUMENT = 2,
  BSE_STATUS_IO = 3,
  BSE_STATUS_PARSE = 4,
  BSE_STATUS_STRUCTURE = 5,
  BSE_STATUS_NUMERICAL = 6,
  /*
   The solution handle is still written and holds the partial result.
   */
  BSE_STATUS_NOT_CONVERGED = 7,
  BSE_STATUS_BUFFER_TOO_SMALL = 8,
  BSE_STATUS_PANIC = 9,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum BseStatus BseStatus;
#else
typedef int32_t BseStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum BseRemedy
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  BSE_REMEDY_AUTO = 0,
  BSE_REMEDY_DCT_FIRST = 1,
  BSE_REMEDY_TRIREC_ONLY = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum BseRemedy BseRemedy;
#else
typedef int32_t BseRemedy;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum BseGeneratorKind
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  BSE_GENERATOR_KIND_RANDOM_COMPLEX = 0,
  BSE_GENERATOR_KIND_RANDOM_REAL = 1,
  BSE_GENERATOR_KIND_DEFECTIVE_FIXTURE = 2,
  BSE_GENERATOR_KIND_BREAKDOWN_FIXTURE = 3,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum BseGeneratorKind BseGeneratorKind;
#else
typedef int32_t BseGeneratorKind;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/*
 Opaque problem handle.
 */
typedef struct BseProblem BseProblem;

/*
 Opaque solution handle.
 */
typedef struct BseSolution BseSolution;

typedef struct BseSolverConfig {
  double conv_tol;
  uint32_t max_iter;
  double breakdown_tol;
  /*
   A [`BseRemedy`] value.
   */
  int32_t remedy;
  double beta;
  double kappa;
  uint64_t seed;
  double rho;
  /*
   Shift α; zero or negative selects it automatically.
   */
  double alpha;
  /*
   Nonzero applies a Newton correction to the converged limit.
   */
  int32_t refine;
} BseSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Build a problem from column-major `n×n` blocks. Imaginary parts may be null.

 # Safety
 Non-null array arguments must point to `n*n` doubles; `out` must be writable.
 */
BseStatus bse_problem_new(size_t n,
                          const double *a_re,
                          const double *a_im,
                          const double *b_re,
                          const double *b_im,
                          struct BseProblem **out);

/*
 Generate a test problem of the given [`BseGeneratorKind`]. Fixture kinds
 ignore `n`, `seed` and `gap`.

 # Safety
 `out` must be writable.
 */
BseStatus bse_problem_generate(int32_t kind,
                               size_t n,
                               uint64_t seed,
                               double gap,
                               struct BseProblem **out);

/*
 Load `A` and `B` from Matrix Market files.

 # Safety
 Paths must be NUL-terminated strings; `out` must be writable.
 */
BseStatus bse_problem_load_mtx(const char *path_a, const char *path_b, struct BseProblem **out);

/*
 Write `A` and `B` as Matrix Market files.

 # Safety
 `p` must be a live handle; paths must be NUL-terminated strings.
 */
BseStatus bse_problem_save_mtx(const struct BseProblem *p, const char *path_a, const char *path_b);

/*
 Order `n` of the blocks, or 0 for a null handle.

 # Safety
 `p` must be null or a live handle.
 */
size_t bse_problem_n(const struct BseProblem *p);

/*
 # Safety
 `p` must be null or a handle not yet freed.
 */
void bse_problem_free(struct BseProblem *p);

struct BseSolverConfig bse_solver_config_default(void);

/*
 Solve the problem. A null `cfg` uses the defaults. On `NotConverged` the
 handle in `out` holds the partial result and must still be freed.

 # Safety
 `p` must be a live handle; `cfg` null or valid; `out` writable.
 */
BseStatus bse_solve(const struct BseProblem *p,
                    const struct BseSolverConfig *cfg,
                    struct BseSolution **out);

/*
 Number of eigenvalues held (`2n`, or 0 if extraction failed).

 # Safety
 `s` must be null or a live handle.
 */
size_t bse_solution_len(const struct BseSolution *s);

/*
 Copy the eigenvalues into `re_out` / `im_out`, each of length `len`.

 # Safety
 `s` must be a live handle; the outputs must hold `len` doubles.
 */
BseStatus bse_solution_eigenvalues(const struct BseSolution *s,
                                   double *re_out,
                                   double *im_out,
                                   size_t len);

/*
 # Safety
 `s` must be null or a live handle.
 */
uint32_t bse_solution_iterations(const struct BseSolution *s);

/*
 1 if converged, 0 otherwise.

 # Safety
 `s` must be null or a live handle.
 */
int32_t bse_solution_converged(const struct BseSolution *s);

/*
 # Safety
 `s` must be null or a live handle.
 */
double bse_solution_alpha(const struct BseSolution *s);

/*
 Relative decomposition residual; NaN if unavailable.

 # Safety
 `s` must be null or a live handle.
 */
double bse_solution_residual(const struct BseSolution *s);

/*
 # Safety
 `s` must be null or a handle not yet freed.
 */
void bse_solution_free(struct BseSolution *s);

/*
 Message for the last failed call on this thread, or null. Valid until the
 next call into this library on the same thread.
 */
const char *bse_last_error_message(void);

const char *bse_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BSE_DOUBLING_H */
