#ifndef POLYENS_H
#define POLYENS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum PolyensStatus {
  POLYENS_STATUS_OK = 0,
  POLYENS_STATUS_NULL_POINTER = 1,
  POLYENS_STATUS_INVALID_ARGUMENT = 2,
  POLYENS_STATUS_RANGE = 3,
  POLYENS_STATUS_NUMERICAL = 4,
  POLYENS_STATUS_MODEL = 5,
  POLYENS_STATUS_UNSUPPORTED = 6,
  POLYENS_STATUS_PANIC = 7,
} PolyensStatus;

/*
 An ensemble with its reference measure and kernel.
 */
typedef struct PolyensEnsemble PolyensEnsemble;

/*
 A recurrence coefficient table.
 */
typedef struct PolyensTable PolyensTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static NUL-terminated string.
 */
const char *polyens_version(void);

/*
 Message for the last failed call on this thread, or NULL. The pointer
 stays valid until the next call into the library on the same thread.
 */
const char *polyens_last_error_message(void);

/*
 Classical table ("gue", "chebyshev" or "uniform-circle") with `pad`
 coefficients beyond index N.

 # Safety
 `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PolyensStatus polyens_table_classical(const char *name,
                                           size_t n,
                                           size_t pad,
                                           struct PolyensTable **out);

/*
 Table from its JSON form, e.g. `{"form":"op","N":3,"a":[...],"b":[...]}`.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PolyensStatus polyens_table_from_json(const char *json, struct PolyensTable **out);

/*
 # Safety
 `table` must come from this library and not be freed twice; NULL is ignored.
 */
void polyens_table_free(struct PolyensTable *table);

/*
 # Safety
 Pointers must be valid.
 */
enum PolyensStatus polyens_table_size(const struct PolyensTable *table, size_t *out);

/*
 `(1/N) Σ_{k<N} ⟨x^l P_k, Q_k⟩`.

 # Safety
 Pointers must be valid.
 */
enum PolyensStatus polyens_mean_moment(const struct PolyensTable *table, size_t l, double *out);

/*
 `⟨x^l P_k, Q_m⟩`.

 # Safety
 Pointers must be valid.
 */
enum PolyensStatus polyens_path_sum_moment(const struct PolyensTable *table,
                                           size_t l,
                                           size_t k,
                                           size_t m,
                                           double *out);

/*
 Exact `Var[Σ x_i^l]`.

 # Safety
 Pointers must be valid.
 */
enum PolyensStatus polyens_variance_power(const struct PolyensTable *table, size_t l, double *out);

/*
 Gap between the l-th mean moment and the l-th zero moment, and its bound.

 # Safety
 Pointers must be valid.
 */
enum PolyensStatus polyens_moment_gap(const struct PolyensTable *table,
                                      size_t l,
                                      double *gap,
                                      double *bound);

/*
 Zeros of the average characteristic polynomial. `re` and `im` must hold
 `len ≥ N` values.

 # Safety
 `re` and `im` must point to `len` writable doubles.
 */
enum PolyensStatus polyens_zeros(const struct PolyensTable *table,
                                 double *re,
                                 double *im,
                                 size_t len);

/*
 Ensemble from a JSON config (classical, explicit measure, or tilted).

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PolyensStatus polyens_ensemble_from_json(const char *json, struct PolyensEnsemble **out);

/*
 # Safety
 `ensemble` must come from this library and not be freed twice; NULL is ignored.
 */
void polyens_ensemble_free(struct PolyensEnsemble *ensemble);

/*
 # Safety
 Pointers must be valid.
 */
enum PolyensStatus polyens_ensemble_size(const struct PolyensEnsemble *ensemble, size_t *out);

/*
 One exact sample from stream `replica` of `seed`, in drawing order.
 Real ensembles write zeros to `im`.

 # Safety
 `re` and `im` must point to `len ≥ N` writable doubles; `log_density`
 may be NULL.
 */
enum PolyensStatus polyens_sample(const struct PolyensEnsemble *ensemble,
                                  uint64_t seed,
                                  uint64_t replica,
                                  double *re,
                                  double *im,
                                  size_t len,
                                  double *log_density);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYENS_H */
