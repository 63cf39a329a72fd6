/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef OREDIFF_H
#define OREDIFF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum OrediffStatus {
  OrediffStatus_Ok = 0,
  OrediffStatus_NullPointer = 1,
  OrediffStatus_InvalidParameter = 2,
  /**
   * Calls made in an unsupported order.
   */
  OrediffStatus_Usage = 3,
  /**
   * An unbounded window ran past its sample cap.
   */
  OrediffStatus_HistoryCapExceeded = 4,
  /**
   * A Rust panic was caught; the handle should be freed.
   */
  OrediffStatus_Panic = 5,
} OrediffStatus;

/**
 * Opaque differentiator handle.
 */
typedef struct OrediffDifferentiator OrediffDifferentiator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a differentiator. `kbar = 0` selects an unbounded window.
 * Requires `gamma > l`. On success `*out` owns the new handle, to be
 * released with [`orediff_differentiator_free`].
 *
 * # Safety
 * `out` must be NULL or valid for writing one pointer.
 */
enum OrediffStatus orediff_differentiator_new(double l,
                                              double delta,
                                              uintptr_t kbar,
                                              double gamma,
                                              uint64_t k0,
                                              struct OrediffDifferentiator **out);

/**
 * Feeds the next sample `u` and writes the filtered estimate to `*out_y`.
 *
 * `out_ys`, `out_nhat` and `out_ell` may be NULL. They receive the
 * unfiltered estimate, the noise estimate and the window length used; on the
 * first sample these are NaN, 0 and 0.
 *
 * # Safety
 * `handle` must be NULL or a live handle from [`orediff_differentiator_new`]
 * not used concurrently. Each non-NULL output pointer must be writable.
 */
enum OrediffStatus orediff_differentiator_step(struct OrediffDifferentiator *handle,
                                               double u,
                                               double *out_y,
                                               double *out_ys,
                                               double *out_nhat,
                                               uintptr_t *out_ell);

/**
 * Returns the handle to its freshly created state.
 *
 * # Safety
 * `handle` must be NULL or a live handle not used concurrently.
 */
enum OrediffStatus orediff_differentiator_reset(struct OrediffDifferentiator *handle);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `handle` must be NULL or a handle from [`orediff_differentiator_new`]
 * that has not been freed.
 */
void orediff_differentiator_free(struct OrediffDifferentiator *handle);

/**
 * Worst-case error `2√(2NL) + LΔ/2`.
 */
double orediff_theorem2_bound(double l, double n, double delta);

/**
 * Time in seconds after which the worst-case error bound holds.
 *
 * # Safety
 * `out` must be NULL or valid for writing one `double`.
 */
enum OrediffStatus orediff_convergence_time(double l,
                                            double n,
                                            double delta,
                                            double gamma,
                                            uint64_t k0,
                                            double r1,
                                            double *out);

/**
 * Message of the last failure on this thread, or NULL if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *orediff_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *orediff_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OREDIFF_H */
