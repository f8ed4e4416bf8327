#ifndef PEDFUSE_H
#define PEDFUSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PedfuseStatus {
  PEDFUSE_STATUS_OK = 0,
  PEDFUSE_STATUS_NULL_POINTER = 1,
  PEDFUSE_STATUS_INVALID_ARGUMENT = 2,
  PEDFUSE_STATUS_DATA = 3,
  PEDFUSE_STATUS_NUMERIC = 4,
  PEDFUSE_STATUS_IO = 5,
  PEDFUSE_STATUS_PANIC = 6,
} PedfuseStatus;

/**
 * Opaque model handle. Create with [`pedfuse_model_new`] or
 * [`pedfuse_model_load`], release with [`pedfuse_model_free`].
 */
typedef struct PedfuseModel PedfuseModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Freshly initialized model. `use_vehicle`/`use_head` are 0 or 1.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PedfuseStatus pedfuse_model_new(uint32_t encoder_hidden,
                                     uint32_t decoder_hidden,
                                     uint8_t use_vehicle,
                                     uint8_t use_head,
                                     uint64_t seed,
                                     struct PedfuseModel **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PedfuseStatus pedfuse_model_load(const char *path, struct PedfuseModel **out);

/**
 * # Safety
 * `model` must come from this library; `path` must be NUL-terminated.
 */
enum PedfuseStatus pedfuse_model_save(const struct PedfuseModel *model, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void pedfuse_model_free(struct PedfuseModel *model);

/**
 * # Safety
 * `model` must come from this library; `out` must be writable.
 */
enum PedfuseStatus pedfuse_model_param_count(const struct PedfuseModel *model, uint64_t *out);

/**
 * Forecasts ten future positions.
 *
 * `ped_past` and `veh_past` hold 5 (x, y) pairs (10 doubles) oldest first
 * with the current pedestrian position at the origin; `head_past` holds 5
 * world-frame yaws. Streams the model does not use may be null. `out`
 * receives 10 (x, y) pairs (20 doubles).
 *
 * # Safety
 * Non-null pointers must reference arrays of the stated lengths.
 */
enum PedfuseStatus pedfuse_model_forecast(const struct PedfuseModel *model,
                                          const double *ped_past,
                                          const double *veh_past,
                                          const double *head_past,
                                          double *out);

/**
 * RMSE over `n_samples` forecasts, each 10 (x, y) pairs.
 *
 * # Safety
 * `preds` and `targets` must hold `20 · n_samples` doubles each.
 */
enum PedfuseStatus pedfuse_rmse(const double *preds,
                                const double *targets,
                                size_t n_samples,
                                double *out);

/**
 * 1 when `head_theta` is within `half_angle` of the bearing from the
 * pedestrian to the vehicle, else 0.
 *
 * # Safety
 * `out` must be writable.
 */
enum PedfuseStatus pedfuse_looking_flag(double head_theta,
                                        double ped_x,
                                        double ped_y,
                                        double veh_x,
                                        double veh_y,
                                        double half_angle,
                                        uint8_t *out);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *pedfuse_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pedfuse_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEDFUSE_H */
