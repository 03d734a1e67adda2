#ifndef FSLSENSE_H
#define FSLSENSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FslStatus {
  FSL_STATUS_OK = 0,
  FSL_STATUS_NULL_POINTER = 1,
  FSL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * `cos(theta) = 0`: the zero-mode recursion is undefined.
   */
  FSL_STATUS_PIVOT_VANISHES = 3,
  FSL_STATUS_NUMERIC = 4,
  FSL_STATUS_TOO_LARGE = 5,
  FSL_STATUS_UNSUPPORTED = 6,
  FSL_STATUS_BUFFER_TOO_SMALL = 7,
  FSL_STATUS_PANIC = 8,
} FslStatus;

/**
 * Opaque model handle.
 */
typedef struct FslModel FslModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fsl_version(void);

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next `fsl_*` call on the same thread.
 */
const char *fsl_last_error(void);

/**
 * Build a model with `n` excitations, angle `theta_over_pi` (units of pi),
 * nonlinear coupling `gamma` and energy scale `g`.
 *
 * # Safety
 * `out` must be NULL or valid for writing one pointer.
 */
enum FslStatus fsl_model_new(size_t n,
                             double theta_over_pi,
                             double gamma,
                             double g,
                             struct FslModel **out);

/**
 * Release a handle. NULL is ignored.
 *
 * # Safety
 * `model` must be NULL or a handle from [`fsl_model_new`] not yet freed.
 */
void fsl_model_free(struct FslModel *model);

/**
 * Number of excitations, or 0 for a NULL handle.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t fsl_model_n(const struct FslModel *model);

/**
 * Quantum Fisher information of the zero mode with respect to theta.
 *
 * # Safety
 * `model` must be a live handle and `out` valid for writing.
 */
enum FslStatus fsl_qfi(const struct FslModel *model, double *out);

/**
 * Spectral gap above the zero mode. `gap` underflows to 0 for extremely
 * small gaps; `ln_gap` (optional, may be NULL) stays finite.
 *
 * # Safety
 * `model` must be a live handle, `gap` valid for writing, `ln_gap` NULL or
 * valid for writing.
 */
enum FslStatus fsl_gap(const struct FslModel *model, double *gap, double *ln_gap);

/**
 * Copy the normalized zero-mode amplitudes `u_0 ..= u_N` into `buf`.
 *
 * `written` always receives the required length `N + 1`. Pass `buf = NULL`
 * and `len = 0` to query it; a short buffer yields
 * [`FslStatus::BufferTooSmall`] and is left untouched.
 *
 * # Safety
 * `model` must be a live handle, `written` valid for writing, and `buf`
 * valid for `len` doubles when `len > 0`.
 */
enum FslStatus fsl_zero_mode(const struct FslModel *model,
                             double *buf,
                             size_t len,
                             size_t *written);

/**
 * Critical angle in units of pi where the junction and tangency thresholds meet.
 */
double fsl_theta_critical_over_pi(void);

/**
 * Human-readable name of a status code, as a static string.
 */
const char *fsl_status_name(enum FslStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSLSENSE_H */
