#ifndef STL_SYNTH_H
#define STL_SYNTH_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StlEncoding {
  STL_ENCODING_PROPOSED = 0,
  STL_ENCODING_STANDARD = 1,
} StlEncoding;

typedef enum StlSolveStatus {
  STL_SOLVE_STATUS_OPTIMAL = 0,
  STL_SOLVE_STATUS_INFEASIBLE = 1,
  STL_SOLVE_STATUS_NODE_LIMIT = 2,
  STL_SOLVE_STATUS_TIME_LIMIT = 3,
} StlSolveStatus;

typedef enum StlStatus {
  STL_STATUS_OK = 0,
  STL_STATUS_NULL_POINTER = 1,
  STL_STATUS_INVALID_UTF8 = 2,
  STL_STATUS_INVALID_ARGUMENT = 3,
  STL_STATUS_PARSE = 4,
  STL_STATUS_ENCODE = 5,
  STL_STATUS_SOLVER = 6,
  // No value of the requested kind, e.g. robustness of an infeasible result.
  STL_STATUS_NO_VALUE = 7,
  STL_STATUS_PANIC = 8,
} StlStatus;

// An encoded synthesis problem.
typedef struct StlProblem StlProblem;

// A verified solve outcome together with the problem summary it came from.
typedef struct StlResult StlResult;

typedef struct StlCounts {
  size_t binary;
  size_t continuous;
  size_t constraints;
  size_t leaves;
} StlCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty when none. The
// pointer stays valid until the next failing call on the same thread.
const char *stl_last_error(void);

// Parses `spec` against the regions in `regions_json`, then encodes it for
// the planar double integrator from `x0` (`x0_len` must be 4).
//
// # Safety
// `spec` and `regions_json` must be NUL-terminated strings, `x0` must point
// to `x0_len` doubles and `out` must be writable.
enum StlStatus stl_problem_new(const char *spec,
                               const char *regions_json,
                               const double *x0,
                               size_t x0_len,
                               size_t horizon,
                               enum StlEncoding encoding,
                               bool flatten,
                               struct StlProblem **out);

// # Safety
// `problem` must come from [`stl_problem_new`] and not be used afterwards.
void stl_problem_free(struct StlProblem *problem);

// # Safety
// `problem` must be a live handle and `out` writable.
enum StlStatus stl_problem_counts(const struct StlProblem *problem, struct StlCounts *out);

// Writes the model in LP format to a new string in `*out`.
//
// # Safety
// `problem` must be a live handle and `out` writable.
enum StlStatus stl_problem_export_lp(const struct StlProblem *problem, char **out);

// Solves with the built-in branch-and-bound. A zero `time_limit_ms` or
// `node_limit` means no limit and the default limit respectively.
//
// # Safety
// `problem` must be a live handle and `out` writable.
enum StlStatus stl_solve(const struct StlProblem *problem,
                         uint64_t time_limit_ms,
                         size_t node_limit,
                         struct StlResult **out);

// Verifies a `name value` solution produced by an external solver.
//
// # Safety
// `problem` must be a live handle, `solution` a NUL-terminated string and
// `out` writable.
enum StlStatus stl_import_solution(const struct StlProblem *problem,
                                   const char *solution,
                                   struct StlResult **out);

// # Safety
// `result` must be a live handle and `out` writable.
enum StlStatus stl_result_status(const struct StlResult *result, enum StlSolveStatus *out);

// Robustness variable of the solution; `NoValue` when there is none.
//
// # Safety
// `result` must be a live handle and `out` writable.
enum StlStatus stl_result_rho(const struct StlResult *result, double *out);

// Number of trajectory samples (`T + 1`), zero without a solution.
//
// # Safety
// `result` must be a live handle.
size_t stl_result_len(const struct StlResult *result);

// Copies the outputs at step `t` into `buf`, which holds `len` doubles.
//
// # Safety
// `result` must be a live handle and `buf` must point to `len` writable doubles.
enum StlStatus stl_result_output(const struct StlResult *result, size_t t, double *buf, size_t len);

// JSON summary of the result (same shape as the CLI output).
//
// # Safety
// `result` must be a live handle and `out` writable.
enum StlStatus stl_result_to_json(const struct StlResult *result, char **out);

// # Safety
// `result` must come from this library and not be used afterwards.
void stl_result_free(struct StlResult *result);

// # Safety
// `s` must be a string returned by this library and not be used afterwards.
void stl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STL_SYNTH_H */
