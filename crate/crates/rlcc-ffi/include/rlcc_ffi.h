/* C ABI for distilled rate-control policy inference. */

#ifndef RLCC_FFI_H
#define RLCC_FFI_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every FFI entry point.
 */
typedef enum RlccStatus {
  Ok = 0,
  NullArgument = 1,
  Io = 2,
  Parse = 3,
  DimensionMismatch = 4,
  InvalidUtf8 = 5,
  NonFinite = 6,
  Panic = 7,
} RlccStatus;

/*
 Opaque handle to a loaded tree ensemble.
 */
typedef struct RlccEnsemble RlccEnsemble;

/*
 Opaque handle to a loaded MLP policy checkpoint.
 */
typedef struct RlccPolicy RlccPolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Loads a tree ensemble from a description file.

 # Safety
 `path` must be a valid NUL-terminated string; `out` must be a valid
 pointer. On `Ok` the caller owns the handle and must release it with
 [`rlcc_ensemble_free`].
 */
enum RlccStatus rlcc_ensemble_load(const char *path, struct RlccEnsemble **out);

/*
 Parses a tree ensemble from in-memory description text.

 # Safety
 As [`rlcc_ensemble_load`], with `text` holding the description itself.
 */
enum RlccStatus rlcc_ensemble_from_text(const char *text, struct RlccEnsemble **out);

/*
 Releases an ensemble handle. Passing NULL is a no-op.

 # Safety
 `handle` must have come from an `rlcc_ensemble_*` constructor and must
 not be used afterwards.
 */
void rlcc_ensemble_free(struct RlccEnsemble *handle);

/*
 Feature-vector width the ensemble expects, or -1 for NULL.

 # Safety
 `handle` must be a live ensemble handle or NULL.
 */
int32_t rlcc_ensemble_input_dim(const struct RlccEnsemble *handle);

/*
 Worst-case operation count certificate, or -1 for NULL.

 # Safety
 `handle` must be a live ensemble handle or NULL.
 */
int32_t rlcc_ensemble_op_count(const struct RlccEnsemble *handle);

/*
 Evaluates the ensemble on `features[0..len)`, writing the raw output in
 log-multiplier space to `out`.

 # Safety
 `features` must point to `len` readable doubles; `out` must be writable.
 */
enum RlccStatus rlcc_ensemble_predict(const struct RlccEnsemble *handle,
                                      const double *features,
                                      uintptr_t len,
                                      double *out);

/*
 Loads an MLP policy checkpoint.

 # Safety
 As [`rlcc_ensemble_load`]; release with [`rlcc_policy_free`].
 */
enum RlccStatus rlcc_policy_load(const char *path, struct RlccPolicy **out);

/*
 Releases a policy handle. Passing NULL is a no-op.

 # Safety
 `handle` must have come from [`rlcc_policy_load`] and must not be used
 afterwards.
 */
void rlcc_policy_free(struct RlccPolicy *handle);

/*
 Feature-vector width the policy expects, or -1 for NULL.

 # Safety
 `handle` must be a live policy handle or NULL.
 */
int32_t rlcc_policy_input_dim(const struct RlccPolicy *handle);

/*
 Evaluates the MLP on `features[0..len)`, writing the raw output to `out`.

 # Safety
 As [`rlcc_ensemble_predict`].
 */
enum RlccStatus rlcc_policy_predict(const struct RlccPolicy *handle,
                                    const double *features,
                                    uintptr_t len,
                                    double *out);

/*
 Clamp bounds of the policy's action map, in log-multiplier space.

 # Safety
 `handle`, `y_min`, and `y_max` must be valid pointers.
 */
enum RlccStatus rlcc_policy_clamp_bounds(const struct RlccPolicy *handle,
                                         double *y_min,
                                         double *y_max);

/*
 Maps a raw output to a rate multiplier via `exp(clamp(y, y_min, y_max))`.

 # Safety
 `out` must be a valid pointer.
 */
enum RlccStatus rlcc_action_multiplier(double y, double y_min, double y_max, double *out);

/*
 Default clamp bounds: multiplier range [0.8, 1.25] in log space.

 # Safety
 `out` must be a valid pointer.
 */
enum RlccStatus rlcc_default_multiplier(double y, double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RLCC_FFI_H */
