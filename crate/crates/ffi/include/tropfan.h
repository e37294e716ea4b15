#ifndef TROPFAN_H
#define TROPFAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum {
  TF_STATUS_OK = 0,
  TF_STATUS_NULL_POINTER = 1,
  TF_STATUS_INVALID_UTF8 = 2,
  TF_STATUS_PARSE = 3,
  TF_STATUS_INVALID_FAN = 4,
  TF_STATUS_INVALID_FUNCTION = 5,
  TF_STATUS_INVALID_MATROID = 6,
  /**
   * Poincaré duality over Q fails, so HR is undefined.
   */
  TF_STATUS_PD_FAILS = 7,
  TF_STATUS_BUFFER_TOO_SMALL = 8,
  TF_STATUS_OTHER = 9,
  TF_STATUS_PANIC = 10,
} TfStatus;

/**
 * Simplicial fan with its orientation.
 */
typedef struct TfFan TfFan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Owned by the
 * library and valid until the next failing call.
 */
const char *tf_last_error(void);

/**
 * Parses a fan from JSON. Without a `weights` key the orientation is 1.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
TfStatus tf_fan_from_json(const char *json, TfFan **out);

/**
 * Canonical JSON of a fan; release it with `tf_string_free`.
 *
 * # Safety
 * `fan` must come from this library and `out` must be valid.
 */
TfStatus tf_fan_to_json(const TfFan *fan, char **out);

/**
 * # Safety
 * `fan` must come from this library (or be null) and not be used afterwards.
 */
void tf_fan_free(TfFan *fan);

/**
 * # Safety
 * `s` must come from this library (or be null) and not be used afterwards.
 */
void tf_string_free(char *s);

/**
 * Ambient rank, dimension and number of rays.
 *
 * # Safety
 * `fan` must come from this library; the outputs must be valid pointers.
 */
TfStatus tf_fan_shape(const TfFan *fan, size_t *rank, size_t *dim, size_t *rays);

/**
 * # Safety
 * `fan` must come from this library and `out` must be valid.
 */
TfStatus tf_is_balanced(const TfFan *fan, bool *out);

/**
 * Free ranks of the Chow ring in degrees `0..=dim`. `len` receives the
 * number of degrees; when it exceeds `cap` nothing is written to `ranks`
 * and `BufferTooSmall` is returned.
 *
 * # Safety
 * `fan` must come from this library, `ranks` must hold `cap` entries.
 */
TfStatus tf_chow_ranks(const TfFan *fan, size_t *ranks, size_t cap, size_t *len);

/**
 * Poincaré duality over Z (`rational = false`) or Q.
 *
 * # Safety
 * `fan` must come from this library and `holds` must be valid.
 */
TfStatus tf_pd_check(const TfFan *fan, bool rational, bool *holds);

/**
 * Hodge-Riemann relations for `ℓ(f)`, `f` in the function JSON format.
 * `signatures` receives `plus - minus` for `k = 0..=dim/2` when it has room.
 *
 * # Safety
 * `fan` must come from this library, `function` must be nul-terminated and
 * `signatures` must hold `cap` entries.
 */
TfStatus tf_hr_check(const TfFan *fan,
                     const char *function,
                     bool *pass,
                     int64_t *signatures,
                     size_t cap,
                     size_t *len);

/**
 * Bergman fan of the uniform matroid `U_{r,n}`.
 *
 * # Safety
 * `out` must be valid.
 */
TfStatus tf_bergman_uniform(size_t r, size_t n, TfFan **out);

/**
 * # Safety
 * Both fans must come from this library and `out` must be valid.
 */
TfStatus tf_product(const TfFan *a, const TfFan *b, TfFan **out);

/**
 * Stellar subdivision at the cone with the given ray indices; the new ray
 * is the sum of the cone's rays and gets the last index.
 *
 * # Safety
 * `fan` must come from this library, `cone` must hold `len` entries and
 * `out` must be valid.
 */
TfStatus tf_blowup(const TfFan *fan, const size_t *cone, size_t len, TfFan **out);

/**
 * Tropical modification along `f`, given in the function JSON format.
 *
 * # Safety
 * `fan` must come from this library, `function` must be nul-terminated and
 * `out` must be valid.
 */
TfStatus tf_tropmod(const TfFan *fan, const char *function, TfFan **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TROPFAN_H */
