#ifndef SURVEILCORR_H
#define SURVEILCORR_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_POINTER = 1,
  SC_STATUS_INVALID_ARGUMENT = 2,
  SC_STATUS_PARSE_ERROR = 3,
  SC_STATUS_DATA_ERROR = 4,
  SC_STATUS_PANIC = 5,
} ScStatus;

/**
 * Opaque pairwise score matrix.
 */
typedef struct ScScoreMatrix ScScoreMatrix;

/**
 * Opaque parsed surveillance table.
 */
typedef struct ScTable ScTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `sc_*` call on the same thread.
 */
const char *sc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sc_version(void);

/**
 * Parses `len` bytes of wide-format UTF-8 CSV.
 *
 * # Safety
 * `text` must point to `len` readable bytes; `out` must be writable.
 */
enum ScStatus sc_table_parse(const uint8_t *text, size_t len, struct ScTable **out);

/**
 * # Safety
 * `table` must come from [`sc_table_parse`] and not be freed twice.
 */
void sc_table_free(struct ScTable *table);

/**
 * Number of regions; 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t sc_table_region_count(const struct ScTable *table);

/**
 * Number of week columns; 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t sc_table_week_count(const struct ScTable *table);

/**
 * Scores every region pair. `first_week = last_week = 0` selects the whole
 * record; `threads = 0` uses the default pool.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum ScStatus sc_score_matrix_compute(const struct ScTable *table,
                                      size_t lag_max,
                                      size_t first_week,
                                      size_t last_week,
                                      bool prewhiten,
                                      size_t threads,
                                      struct ScScoreMatrix **out);

/**
 * # Safety
 * `matrix` must come from [`sc_score_matrix_compute`] and not be freed twice.
 */
void sc_score_matrix_free(struct ScScoreMatrix *matrix);

/**
 * Number of stored (non-skipped) scores; 0 for a null handle.
 *
 * # Safety
 * `matrix` must be null or a live handle.
 */
size_t sc_score_matrix_stored_count(const struct ScScoreMatrix *matrix);

/**
 * Score of pair `(i, j)`. `*present` is false for a skipped pair, in which
 * case `*score` is NaN.
 *
 * # Safety
 * `matrix` must be a live handle; `score` and `present` must be writable.
 */
enum ScStatus sc_score_matrix_get(const struct ScScoreMatrix *matrix,
                                  size_t i,
                                  size_t j,
                                  double *score,
                                  bool *present);

/**
 * Writes the `k` best partners of `region` into `indices` and `scores`
 * (each of length `k`), best first.
 *
 * # Safety
 * `matrix` must be a live handle; both arrays must hold `k` elements.
 */
enum ScStatus sc_score_matrix_top_k(const struct ScScoreMatrix *matrix,
                                    size_t region,
                                    size_t k,
                                    size_t *indices,
                                    double *scores);

/**
 * Cross-correlation of `x` and `y` (each of length `n`) at lags
 * `-lag_max..=lag_max`, written to `out` (length `2 * lag_max + 1`).
 *
 * # Safety
 * `x` and `y` must hold `n` elements; `out` must hold `2 * lag_max + 1`.
 */
enum ScStatus sc_ccf(const double *x, const double *y, size_t n, size_t lag_max, double *out);

/**
 * Weighted score of a correlation vector of odd length `len`.
 *
 * # Safety
 * `values` must hold `len` elements; `out` must be writable.
 */
enum ScStatus sc_weighted_score(const double *values, size_t len, double *out);

/**
 * EARS-C over `n` weekly counts. Writes `n - baseline` thresholds and alarm
 * flags, one per week after the first `baseline` weeks.
 *
 * # Safety
 * `values` must hold `n` elements; `thresholds` and `alarms` must hold
 * `n - baseline` elements.
 */
enum ScStatus sc_ears_c(const double *values,
                        size_t n,
                        size_t baseline,
                        double alpha,
                        double *thresholds,
                        bool *alarms);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURVEILCORR_H */
