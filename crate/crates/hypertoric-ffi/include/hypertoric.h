#ifndef HYPERTORIC_H
#define HYPERTORIC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HtStatus {
  HT_STATUS_OK = 0,
  HT_STATUS_NULL_POINTER = 1,
  HT_STATUS_INVALID_UTF8 = 2,
  HT_STATUS_PARSE_ERROR = 3,
  // Bad sequence, bad dimensions or a zero denominator.
  HT_STATUS_INVALID_INPUT = 4,
  HT_STATUS_NON_GENERIC = 5,
  // A job ran but some verification did not pass.
  HT_STATUS_VERIFICATION_FAILED = 6,
  HT_STATUS_COMPUTATION_FAILED = 7,
  HT_STATUS_BUFFER_TOO_SMALL = 8,
  HT_STATUS_PANIC = 9,
} HtStatus;

// A torus arrangement together with its face poset.
typedef struct HtArrangement HtArrangement;

// The outcome of a job run.
typedef struct HtReport HtReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failed call on this thread; empty after a
// success. Valid until the next call on the same thread.
const char *ht_last_error(void);

// Static version string.
const char *ht_version(void);

// Builds an arrangement of `n` families on the `d`-torus. `conormals` holds
// `n * d` integers row by row, offsets are `num[i] / den[i]`.
//
// # Safety
// The arrays must hold `n * d`, `n` and `n` readable entries; `out` must be
// writable. Arrays may be null when `n == 0`.
enum HtStatus ht_arrangement_new(size_t d,
                                 size_t n,
                                 const int64_t *conormals,
                                 const int64_t *offset_num,
                                 const int64_t *offset_den,
                                 struct HtArrangement **out);

// # Safety
// `arr` must come from [`ht_arrangement_new`] and not be used afterwards.
void ht_arrangement_free(struct HtArrangement *arr);

// Number of torus faces of dimension `dim`.
//
// # Safety
// `arr` must be a live handle and `out` writable.
enum HtStatus ht_arrangement_face_count(const struct HtArrangement *arr, size_t dim, size_t *out);

// Euler characteristic of the skeleton over the arrangement.
//
// # Safety
// `arr` must be a live handle and `out` writable.
enum HtStatus ht_skeleton_euler(const struct HtArrangement *arr, int64_t *out);

// Graded dimensions `0..=degree` of the collapsed global algebra, written
// to `dims` (which must hold `degree + 1` entries). `flavor` is 0 for the
// degenerate algebra, 1 for the full one.
//
// # Safety
// `arr` must be a live handle and `dims` must hold `len` writable entries.
enum HtStatus ht_global_dims(const struct HtArrangement *arr,
                             uint32_t flavor,
                             uint32_t degree,
                             size_t *dims,
                             size_t len);

// Runs a JSON job. On success or verification failure `out` receives a
// report handle; the status is `HT_STATUS_VERIFICATION_FAILED` when some
// stage did not pass and `HT_STATUS_INVALID_INPUT` for bad input.
//
// # Safety
// `job_json` must be a NUL-terminated string; `out` must be writable.
enum HtStatus ht_run_job(const char *job_json, struct HtReport **out);

// 0 pass, 1 verification failure, 2 input error.
//
// # Safety
// `report` must be a live handle.
int32_t ht_report_exit_code(const struct HtReport *report);

// JSON text of the report, owned by the handle.
//
// # Safety
// `report` must be a live handle; the pointer dies with it.
const char *ht_report_json(const struct HtReport *report);

// Human-readable summary; release with [`ht_string_free`].
//
// # Safety
// `report` must be a live handle.
char *ht_report_summary(const struct HtReport *report);

// # Safety
// `report` must come from [`ht_run_job`] and not be used afterwards.
void ht_report_free(struct HtReport *report);

// # Safety
// `s` must come from this library and not be freed twice.
void ht_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERTORIC_H */
