#ifndef HWMISO_H
#define HWMISO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HwmisoStatus {
  HWMISO_STATUS_OK = 0,
  HWMISO_STATUS_NULL_POINTER = 1,
  HWMISO_STATUS_DOMAIN = 2,
  HWMISO_STATUS_INVALID_MATRIX = 3,
  HWMISO_STATUS_DIMENSION_MISMATCH = 4,
  HWMISO_STATUS_SINGULAR = 5,
  HWMISO_STATUS_DEGENERATE_CHANNEL = 6,
  HWMISO_STATUS_CONFIG = 7,
  HWMISO_STATUS_IO = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  HWMISO_STATUS_INTERNAL = 9,
} HwmisoStatus;

/**
 * Downlink data configuration.
 */
typedef struct HwmisoDownlink HwmisoDownlink;

/**
 * Uplink pilot configuration.
 */
typedef struct HwmisoUplink HwmisoUplink;

/**
 * Distortion levels (squared EVM) at each transceiver.
 */
typedef struct HwmisoImpairments {
  double kappa_t_bs;
  double kappa_r_bs;
  double kappa_t_ut;
  double kappa_r_ut;
} HwmisoImpairments;

typedef struct HwmisoEstimate {
  double value;
  double std_error;
  uint64_t n_samples;
} HwmisoEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hwmiso_last_error(void);

/**
 * Exponential integral E₁(x), x > 0.
 *
 * # Safety
 * `result` must be null or valid for writes.
 */
enum HwmisoStatus hwmiso_exp_integral_e1(double x, double *result);

/**
 * `1 − x·eˣ·E₁(x)`, x > 0.
 *
 * # Safety
 * `result` must be null or valid for writes.
 */
enum HwmisoStatus hwmiso_one_minus_x_ex_e1(double x, double *result);

/**
 * Uplink with channel covariance `R` and noise covariance `S`, each `n×n`
 * column-major; null imaginary parts mean real matrices.
 *
 * # Safety
 * Non-null matrix pointers must reference `n·n` doubles; `imp` must be
 * null or valid; `handle` must be null or valid for writes.
 */
enum HwmisoStatus hwmiso_uplink_new(size_t n,
                                    const double *r_re,
                                    const double *r_im,
                                    const double *s_re,
                                    const double *s_im,
                                    double p_ut,
                                    const struct HwmisoImpairments *imp,
                                    struct HwmisoUplink **handle);

/**
 * Uplink with exponential correlation `R[i,j] = rho^|i−j|` and
 * `S = noise·I`.
 *
 * # Safety
 * `imp` must be null or valid; `handle` must be null or valid for writes.
 */
enum HwmisoStatus hwmiso_uplink_new_exponential(size_t n,
                                                double rho,
                                                double noise,
                                                double p_ut,
                                                const struct HwmisoImpairments *imp,
                                                struct HwmisoUplink **handle);

/**
 * # Safety
 * `handle` must be null or a pointer returned by an uplink constructor
 * that has not been freed.
 */
void hwmiso_uplink_free(struct HwmisoUplink *handle);

/**
 * # Safety
 * `uplink` must be null or a live handle; `n` must be null or writable.
 */
enum HwmisoStatus hwmiso_uplink_dim(const struct HwmisoUplink *uplink, size_t *n);

/**
 * Per-antenna estimation MSE `tr(C)/N`.
 *
 * # Safety
 * `uplink` must be null or a live handle; `result` must be null or writable.
 */
enum HwmisoStatus hwmiso_mse_per_antenna(const struct HwmisoUplink *uplink, double *result);

/**
 * Writes the estimation error covariance into `n·n` column-major buffers.
 *
 * # Safety
 * `uplink` must be null or a live handle; non-null buffers must hold
 * `n·n` doubles for the handle's `n`. `im` may be null.
 */
enum HwmisoStatus hwmiso_error_covariance(const struct HwmisoUplink *uplink,
                                          double *re,
                                          double *im);

/**
 * # Safety
 * `imp` must be null or valid; `handle` must be null or valid for writes.
 */
enum HwmisoStatus hwmiso_downlink_new(double p_bs,
                                      double sigma2_ut,
                                      const struct HwmisoImpairments *imp,
                                      struct HwmisoDownlink **handle);

/**
 * # Safety
 * `handle` must be null or a pointer returned by [`hwmiso_downlink_new`]
 * that has not been freed.
 */
void hwmiso_downlink_free(struct HwmisoDownlink *handle);

/**
 * Closed-form capacity upper bound in bits per channel use, for the
 * channel covariance of `uplink`.
 *
 * # Safety
 * Handles must be null or live; `result` must be null or writable.
 */
enum HwmisoStatus hwmiso_capacity_upper_bound(const struct HwmisoUplink *uplink,
                                              const struct HwmisoDownlink *downlink,
                                              double *result);

/**
 * Monte-Carlo lower bound with estimated-CSI MRT. Equal seeds give equal
 * results.
 *
 * # Safety
 * Handles must be null or live; `result` must be null or writable.
 */
enum HwmisoStatus hwmiso_lower_bound_mc(const struct HwmisoUplink *uplink,
                                        const struct HwmisoDownlink *downlink,
                                        size_t n_samples,
                                        uint64_t seed,
                                        struct HwmisoEstimate *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HWMISO_H */
