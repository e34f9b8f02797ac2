#ifndef SEMIDEG_H
#define SEMIDEG_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_ARGUMENT = 2,
  SD_STATUS_INVALID_OPERATOR = 3,
  SD_STATUS_SINGULAR = 4,
  SD_STATUS_INADMISSIBLE = 5,
  SD_STATUS_NO_CERTIFICATE = 6,
  SD_STATUS_NOT_FOUND = 7,
  SD_STATUS_HYPOTHESIS = 8,
  SD_STATUS_NUMERICAL = 9,
  SD_STATUS_PANIC = 10,
} SdStatus;

/**
 * Opaque linear operator `A` with its weight.
 */
typedef struct SdOperator SdOperator;

/**
 * Opaque semilinear problem.
 */
typedef struct SdProblem SdProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `sd_*` call on the same thread.
 */
const char *sd_last_error(void);

/**
 * Creates an operator from an `n×n` row-major matrix. `weight` may be null
 * for the identity weight.
 *
 * # Safety
 * `matrix` (and `weight` when non-null) must point to `n*n` doubles and
 * `out` to writable storage for one pointer.
 */
enum SdStatus sd_operator_new(const double *matrix,
                              const double *weight,
                              size_t n,
                              struct SdOperator **out);

/**
 * # Safety
 * `op` must be null or a handle from [`sd_operator_new`] not yet freed.
 */
void sd_operator_free(struct SdOperator *op);

/**
 * Dimension of the operator, 0 for a null handle.
 *
 * # Safety
 * `op` must be null or a live handle.
 */
size_t sd_operator_dim(const struct SdOperator *op);

/**
 * Certified decay rate `ω` with `‖e^{-tA}‖ ≤ e^{-ωt}` in the weighted norm.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum SdStatus sd_operator_decay_rate(const struct SdOperator *op, double *out);

/**
 * `out = e^{-tA} x`, `t ≥ 0`.
 *
 * # Safety
 * `x` and `out` must hold `sd_operator_dim(op)` doubles.
 */
enum SdStatus sd_operator_semigroup_apply(const struct SdOperator *op,
                                          double t,
                                          const double *x,
                                          double *out);

/**
 * `out = (νI + A)^{-1} y`.
 *
 * # Safety
 * `y` and `out` must hold `sd_operator_dim(op)` doubles.
 */
enum SdStatus sd_operator_resolvent_apply(const struct SdOperator *op,
                                          double nu,
                                          const double *y,
                                          double *out);

/**
 * Built-in problem by name: `txline-default`, `heat-1d`, `scalar-linear`,
 * `scalar-forced`, `cubic-2d` or `identity`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` writable.
 */
enum SdStatus sd_problem_preset(const char *name, struct SdProblem **out);

/**
 * # Safety
 * `problem` must be null or a live handle.
 */
void sd_problem_free(struct SdProblem *problem);

/**
 * State dimension, 0 for a null handle.
 *
 * # Safety
 * `problem` must be null or a live handle.
 */
size_t sd_problem_dim(const struct SdProblem *problem);

/**
 * Period `T` and bound `K` (0 when the problem declares none).
 *
 * # Safety
 * `problem` must be a live handle; `period` and `bound` writable.
 */
enum SdStatus sd_problem_constants(const struct SdProblem *problem, double *period, double *bound);

/**
 * Copies the problem's linear part into a new operator handle.
 *
 * # Safety
 * `problem` must be a live handle and `out` writable.
 */
enum SdStatus sd_problem_operator(const struct SdProblem *problem, struct SdOperator **out);

/**
 * Translation along trajectories `out = Φ_t(x)` for `u' = λ(-Au + F(t, u, μ))`.
 *
 * # Safety
 * `x` and `out` must hold `sd_problem_dim(problem)` doubles.
 */
enum SdStatus sd_translate(const struct SdProblem *problem,
                           double t,
                           const double *x,
                           double lambda,
                           double mu,
                           double *out);

/**
 * `Deg(-A + F, U)` on the weighted ball `U = B(center, radius)`, using the
 * time average of `F` for non-autonomous problems. A null `center` means the
 * origin; `radius ≤ 0` selects the default region for the problem.
 *
 * # Safety
 * `center` must be null or hold `sd_problem_dim(problem)` doubles; `out`
 * writable.
 */
enum SdStatus sd_degree_ball(const struct SdProblem *problem,
                             const double *center,
                             double radius,
                             double nu,
                             int64_t *out);

/**
 * Locates an initial state of a `T`-periodic solution in the ball (same
 * conventions as [`sd_degree_ball`]) and writes it to `state`, with the
 * closure defect `‖Φ_T(x) − x‖` in `closure`.
 *
 * # Safety
 * `center` must be null or hold `sd_problem_dim(problem)` doubles, `state`
 * must hold that many doubles and `closure` must be writable.
 */
enum SdStatus sd_find_periodic(const struct SdProblem *problem,
                               const double *center,
                               double radius,
                               double *state,
                               double *closure);

/**
 * Sampled hypothesis check; `passed` is 1 when every entry holds.
 *
 * # Safety
 * `problem` must be a live handle and `passed` writable.
 */
enum SdStatus sd_check_hypotheses(const struct SdProblem *problem, int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMIDEG_H */
