#ifndef MATTERWAVE_CHAOS_H
#define MATTERWAVE_CHAOS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MwcLabel {
  MWC_REGULAR = 0,
  MWC_CHAOTIC = 1,
  MWC_UNBOUNDED = 2,
} MwcLabel;

typedef enum MwcRegion {
  MWC_REGION_A = 0,
  MWC_REGION_B = 1,
  MWC_REGION_BOUNDARY = 2,
} MwcRegion;

// Result code of every call.
typedef enum MwcStatus {
  MWC_OK = 0,
  // A parameter is out of range.
  MWC_INVALID_ARGUMENT = 1,
  // Malformed configuration text.
  MWC_CONFIG = 2,
  // An analytic precondition does not hold (no period, not a zero, ...).
  MWC_PRECONDITION = 3,
  // Quadrature or integration failure, or an escaping trajectory.
  MWC_NUMERIC = 4,
  MWC_NULL_POINTER = 5,
  // A Rust panic was caught at the boundary.
  MWC_PANIC = 6,
} MwcStatus;

// Opaque model: dimensionless constants, lattice and classification policy.
typedef struct MwcModel MwcModel;

// Monte Carlo tally.
typedef struct MwcProbability {
  size_t n_trials;
  size_t n_chaotic;
  size_t n_regular;
  size_t n_unbounded;
  double p_hat;
  double ci_low;
  double ci_high;
} MwcProbability;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Model with a rational wave-vector ratio `gamma = gamma_p / gamma_q`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum MwcStatus mwc_model_new(double d,
                             double g1,
                             double v1,
                             double v2,
                             double k,
                             uint32_t gamma_p,
                             uint32_t gamma_q,
                             double phi,
                             struct MwcModel **out);

// Model with an irrational ratio given by tag and value.
//
// # Safety
// `tag` must be a NUL-terminated string; `out` as for [`mwc_model_new`].
enum MwcStatus mwc_model_new_irrational(double d,
                                        double g1,
                                        double v1,
                                        double v2,
                                        double k,
                                        const char *tag,
                                        double gamma_value,
                                        double phi,
                                        struct MwcModel **out);

// Model from TOML configuration text.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` as for [`mwc_model_new`].
enum MwcStatus mwc_model_from_toml(const char *toml, struct MwcModel **out);

// Releases a model; null is ignored.
//
// # Safety
// `m` must come from a `mwc_model_new*` call and not be used afterwards.
void mwc_model_free(struct MwcModel *m);

// Replaces the iteration count, transient and threshold of the classifier.
//
// # Safety
// `m` must be a live model handle.
enum MwcStatus mwc_model_set_policy(struct MwcModel *m,
                                    size_t n_iters,
                                    size_t drop,
                                    double lambda_threshold);

// Analytic Melnikov function at `c0`.
//
// # Safety
// `m` must be a live model handle and `out` writable.
enum MwcStatus mwc_melnikov(const struct MwcModel *m, double c0, double *out);

// Region boundary `V2b(k)` for `gamma = 2`.
//
// # Safety
// `out` must be writable.
enum MwcStatus mwc_boundary_v2b(double k, double d, double v1, double *out);

// Distinct Melnikov zeros per period. The count goes to `n`; up to
// `capacity` zero locations are copied into `zeros`, which may be null when
// `capacity` is 0.
//
// # Safety
// `m` must be a live model handle, `n` writable, and `zeros` valid for
// `capacity` writes.
enum MwcStatus mwc_count_zeros(const struct MwcModel *m,
                               size_t resolution,
                               size_t *n,
                               double *zeros,
                               size_t capacity);

// Region A/B label of a `gamma = 2` model and the boundary value.
//
// # Safety
// `m` must be a live model handle; `region` and `v2b` writable.
enum MwcStatus mwc_classify_region(const struct MwcModel *m, enum MwcRegion *region, double *v2b);

// Labels the trajectory from `(r, rp)`; `lambda` receives NaN for
// unbounded trajectories.
//
// # Safety
// `m` must be a live model handle; `label` and `lambda` writable.
enum MwcStatus mwc_classify_trajectory(const struct MwcModel *m,
                                       double r,
                                       double rp,
                                       enum MwcLabel *label,
                                       double *lambda);

// Monte Carlo chaos probability over the default initial-condition box.
//
// # Safety
// `m` must be a live model handle and `out` writable.
enum MwcStatus mwc_estimate_probability(const struct MwcModel *m,
                                        size_t n_trials,
                                        uint64_t seed,
                                        struct MwcProbability *out);

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call on the same thread.
const char *mwc_last_error(void);

// Static name of a status code; unknown codes give "unknown status".
const char *mwc_status_name(int32_t status);

// Library version string.
const char *mwc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MATTERWAVE_CHAOS_H */
