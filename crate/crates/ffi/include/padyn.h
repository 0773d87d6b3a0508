#ifndef PADYN_H
#define PADYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the nonnegative ones match the command-line exit codes.
 */
typedef enum PdStatus {
  PD_STATUS_OK = 0,
  PD_STATUS_INCONCLUSIVE = 2,
  PD_STATUS_USAGE = 64,
  PD_STATUS_INTERNAL = 70,
  PD_STATUS_NULL_POINTER = -1,
  PD_STATUS_INVALID_UTF8 = -2,
  PD_STATUS_PANIC = -3,
} PdStatus;

/**
 * Opaque handle to a rational map.
 */
typedef struct PdMap PdMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a map such as `"[2,0,1]/[0,2]"` or `"x^2 + 1"`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum PdStatus pd_map_parse(const char *text, struct PdMap **out);

/**
 * Release a map. Null is ignored.
 *
 * # Safety
 * `map` must come from this library and not have been freed.
 */
void pd_map_free(struct PdMap *map);

/**
 * Degree of the map, or 0 for a null handle.
 *
 * # Safety
 * `map` must be null or a live handle.
 */
size_t pd_map_degree(const struct PdMap *map);

/**
 * The map in array form; free with [`pd_string_free`].
 *
 * # Safety
 * `map` must be a live handle and `out` a valid pointer.
 */
enum PdStatus pd_map_to_string(const struct PdMap *map, char **out);

/**
 * Evaluate at a point such as `"3/2"` or `"inf"`; the image is written as a
 * string to `out`.
 *
 * # Safety
 * `map` must be a live handle, `point` a valid string and `out` a valid pointer.
 */
enum PdStatus pd_map_evaluate(const struct PdMap *map, const char *point, char **out);

/**
 * The `k`-th iterate as a new handle.
 *
 * # Safety
 * `map` must be a live handle and `out` a valid pointer.
 */
enum PdStatus pd_map_iterate(const struct PdMap *map, uint32_t k, struct PdMap **out);

/**
 * Smallest good prime in `[p_min, p_max]` for the orbit of `start`, with its
 * offset and period.
 *
 * # Safety
 * `map` must be a live handle, `start` a valid string, and the output
 * pointers valid.
 */
enum PdStatus pd_find_good_prime(const struct PdMap *map,
                                 const char *start,
                                 uint64_t p_min,
                                 uint64_t p_max,
                                 uint64_t *out_p,
                                 size_t *out_m,
                                 uint64_t *out_a);

/**
 * Run a JSON job and write the JSON report to `out`. The status mirrors the
 * command-line exit code: a report with undecided branches yields
 * `PD_STATUS_INCONCLUSIVE` and still sets `out`.
 *
 * # Safety
 * `job` must be a valid string and `out` a valid pointer.
 */
enum PdStatus pd_run_job_json(const char *job, char **out);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pd_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *pd_last_error(void);

/**
 * Library version as a static string.
 */
const char *pd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PADYN_H */
