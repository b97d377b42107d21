#ifndef HEADPOSE_H
#define HEADPOSE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of values in a network input (64 x 64).
 */
#define HP_INPUT_LEN 4096

typedef enum HpStatus {
  HP_STATUS_OK = 0,
  HP_STATUS_NULL_ARGUMENT = 1,
  HP_STATUS_INVALID_ARGUMENT = 2,
  HP_STATUS_IO = 3,
  HP_STATUS_CHECKPOINT = 4,
  HP_STATUS_PREPROCESS = 5,
  HP_STATUS_MODEL = 6,
  HP_STATUS_PANIC = 7,
} HpStatus;

/**
 * Opaque model handle.
 */
typedef struct HpModel HpModel;

typedef struct HpIntrinsics {
  double fx;
  double fy;
  double cx;
  double cy;
} HpIntrinsics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hp_version(void);

/**
 * Values expected by `hp_model_predict` and written by `hp_preprocess`.
 */
size_t hp_input_len(void);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hp_last_error(void);

/**
 * Creates an untrained model with seeded weights and the default angle scales.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum HpStatus hp_model_new(uint64_t seed, struct HpModel **out);

/**
 * Loads a checkpoint file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum HpStatus hp_model_load(const char *path, struct HpModel **out);

/**
 * Writes the model to a checkpoint file.
 *
 * # Safety
 * `model` must come from this library and `path` must be NUL-terminated.
 */
enum HpStatus hp_model_save(const struct HpModel *model, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void hp_model_free(struct HpModel *model);

/**
 * Predicts (pitch, roll, yaw) in degrees from a preprocessed 64x64 input.
 *
 * # Safety
 * `input` must hold `hp_input_len()` doubles and `out_deg` room for three.
 */
enum HpStatus hp_model_predict(const struct HpModel *model, const double *input, double *out_deg);

/**
 * Crops, segments, resizes, normalizes and stretches a depth frame around
 * the head center. Zero depth marks missing pixels.
 *
 * # Safety
 * `depth_mm` must hold `width * height` values, `center_mm` three doubles
 * and `out` room for `hp_input_len()` doubles.
 */
enum HpStatus hp_preprocess(const uint16_t *depth_mm,
                            size_t width,
                            size_t height,
                            const struct HpIntrinsics *intrinsics,
                            const double *center_mm,
                            double *out);

/**
 * `hp_preprocess` followed by `hp_model_predict`.
 *
 * # Safety
 * Same requirements as `hp_preprocess`, plus a valid `model` and room for
 * three doubles at `out_deg`.
 */
enum HpStatus hp_model_predict_depth(const struct HpModel *model,
                                     const uint16_t *depth_mm,
                                     size_t width,
                                     size_t height,
                                     const struct HpIntrinsics *intrinsics,
                                     const double *center_mm,
                                     double *out_deg);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEADPOSE_H */
