#ifndef MINSURF_H
#define MINSURF_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Solver or quadrature failure.
   */
  MS_STATUS_NUMERICAL = 3,
  MS_STATUS_PANIC = 4,
} MsStatus;

/**
 * Ambient conformally flat metric.
 */
typedef struct MsMetric MsMetric;

/**
 * Solved radial profile with dense output.
 */
typedef struct MsProfile MsProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ms_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ms_version(void);

enum MsStatus ms_metric_flat(size_t dim, struct MsMetric **out);

/**
 * Schwarzschild metric φ^{4/(n-2)}δ with φ = 1 + (m/2)|x|^{2-n}.
 */
enum MsStatus ms_metric_schwarzschild(size_t dim, double mass, struct MsMetric **out);

/**
 * Metric from its JSON form, e.g. `{"dim": 4, "family": "schwarzschild", "mass": 2.0}`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string.
 */
enum MsStatus ms_metric_from_json(const char *json, struct MsMetric **out);

/**
 * # Safety
 * `metric` must come from an `ms_metric_*` constructor and not be freed yet.
 */
void ms_metric_free(struct MsMetric *metric);

/**
 * Scalar curvature at the point `x[0..len]`; `len` must equal the dimension.
 *
 * # Safety
 * `metric` must be a live handle, `x` must point to `len` doubles and `out`
 * to one writable double.
 */
enum MsStatus ms_metric_scalar_curvature(const struct MsMetric *metric,
                                         const double *x,
                                         size_t len,
                                         double *out);

/**
 * ADM mass extrapolated over the increasing radii `radii[0..count]`.
 *
 * # Safety
 * `metric` must be a live handle, `radii` must point to `count` doubles,
 * `limit` and `error` to writable doubles.
 */
enum MsStatus ms_adm_mass(const struct MsMetric *metric,
                          const double *radii,
                          size_t count,
                          double *limit,
                          double *error);

/**
 * Least-area rotationally symmetric graph over the disk of radius `r` with
 * boundary height `z`.
 *
 * # Safety
 * `metric` must be a live handle and `out` a writable slot.
 */
enum MsStatus ms_plateau_solve(const struct MsMetric *metric,
                               double r,
                               double z,
                               struct MsProfile **out);

/**
 * # Safety
 * `profile` must come from `ms_plateau_solve` and not be freed yet.
 */
void ms_profile_free(struct MsProfile *profile);

/**
 * Height f(t) and slope f'(t) for t in [0, r].
 *
 * # Safety
 * `profile` must be a live handle; `f` and `p` writable doubles.
 */
enum MsStatus ms_profile_eval(const struct MsProfile *profile, double t, double *f, double *p);

/**
 * Number of stored samples, for sizing `ms_profile_samples` buffers.
 *
 * # Safety
 * `profile` must be a live handle and `out` writable.
 */
enum MsStatus ms_profile_sample_count(const struct MsProfile *profile, size_t *out);

/**
 * Copies the stored (t, f, p) samples into three buffers of length `cap`,
 * which must be at least the sample count.
 *
 * # Safety
 * `profile` must be a live handle; `t`, `f`, `p` must each hold `cap` doubles.
 */
enum MsStatus ms_profile_samples(const struct MsProfile *profile,
                                 double *t,
                                 double *f,
                                 double *p,
                                 size_t cap);

/**
 * Runs the solution checks; `passed` is 1 when all pass, 0 otherwise, and
 * `failed_ids` (may be null) receives a newly allocated, comma-separated
 * list of failing check ids to release with `ms_string_free`.
 *
 * # Safety
 * `profile` must be a live handle and `passed` writable.
 */
enum MsStatus ms_profile_verify(const struct MsProfile *profile,
                                int32_t *passed,
                                char **failed_ids);

/**
 * # Safety
 * `s` must come from this library and not be freed yet.
 */
void ms_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINSURF_H */
