#ifndef BCMNET_H
#define BCMNET_H

/* Generated by cbindgen from bcmnet-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BcmnetStatus {
  BCMNET_STATUS_OK = 0,
  BCMNET_STATUS_NULL_ARGUMENT = 1,
  BCMNET_STATUS_INVALID_UTF8 = 2,
  BCMNET_STATUS_IO = 3,
  BCMNET_STATUS_PARSE = 4,
  BCMNET_STATUS_INVALID_ARGUMENT = 5,
  BCMNET_STATUS_TRAINING = 6,
  BCMNET_STATUS_BUDGET_INFEASIBLE = 7,
  BCMNET_STATUS_INTERNAL = 8,
} BcmnetStatus;

/**
 * Opaque: per-feature measurement costs.
 */
typedef struct BcmnetCostProfile BcmnetCostProfile;

/**
 * Opaque: a loaded dataset, preprocessed against its schema.
 */
typedef struct BcmnetDataset BcmnetDataset;

/**
 * Opaque: a budget-sorted list of models.
 */
typedef struct BcmnetSchedule BcmnetSchedule;

/**
 * Opaque: a parsed schema file (features, label, zero-cost ids).
 */
typedef struct BcmnetSchema BcmnetSchema;

/**
 * Parameters of a schedule generation run. `hidden_layers` points to
 * `n_hidden` layer widths (at least two).
 */
typedef struct BcmnetScheduleParams {
  uint64_t b_max;
  uint64_t d;
  double p_min;
  uint32_t k;
  uint64_t seed;
  const uint32_t *hidden_layers;
  size_t n_hidden;
  uint32_t epochs;
  uint32_t batch_size;
  double learning_rate;
  double momentum;
  double prune_c0;
  uint32_t prune_max_rounds;
  bool independent_levels;
} BcmnetScheduleParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread; empty string when no
 * call has failed yet. The pointer stays valid until the next failing call
 * on the same thread.
 */
const char *bcmnet_last_error_message(void);

/**
 * Parses a TOML schema file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 * On success `*out` owns a schema that must be released with
 * [`bcmnet_schema_free`].
 */
enum BcmnetStatus bcmnet_schema_load(const char *path, struct BcmnetSchema **out);

/**
 * # Safety
 * `schema` must come from [`bcmnet_schema_load`] and not be freed twice.
 */
void bcmnet_schema_free(struct BcmnetSchema *schema);

/**
 * Number of logical features the schema declares; 0 for NULL input.
 *
 * # Safety
 * `schema` must be NULL or a pointer from [`bcmnet_schema_load`].
 */
size_t bcmnet_schema_feature_count(const struct BcmnetSchema *schema);

/**
 * Loads a CSV dataset against a schema. Rows with missing or unparseable
 * cells are dropped (count them with [`bcmnet_dataset_dropped_rows`]).
 *
 * # Safety
 * Pointer arguments must be valid; `*out` must be released with
 * [`bcmnet_dataset_free`].
 */
enum BcmnetStatus bcmnet_dataset_load(const char *path,
                                      const struct BcmnetSchema *schema,
                                      struct BcmnetDataset **out);

/**
 * # Safety
 * `dataset` must come from [`bcmnet_dataset_load`] and not be freed twice.
 */
void bcmnet_dataset_free(struct BcmnetDataset *dataset);

/**
 * Usable rows after preprocessing; 0 for NULL input.
 *
 * # Safety
 * `dataset` must be NULL or a pointer from [`bcmnet_dataset_load`].
 */
size_t bcmnet_dataset_rows(const struct BcmnetDataset *dataset);

/**
 * Rows dropped as outliers while loading; 0 for NULL input.
 *
 * # Safety
 * `dataset` must be NULL or a pointer from [`bcmnet_dataset_load`].
 */
size_t bcmnet_dataset_dropped_rows(const struct BcmnetDataset *dataset);

/**
 * Draws a uniform integer cost in `[lo, hi]` for every feature, except the
 * `n_zero` ids in `zero_ids` which cost 0. Deterministic per seed.
 *
 * # Safety
 * `zero_ids` must point to `n_zero` readable u16 values (or be NULL when
 * `n_zero == 0`); `*out` must be released with [`bcmnet_cost_profile_free`].
 */
enum BcmnetStatus bcmnet_cost_profile_sample(const struct BcmnetSchema *schema,
                                             uint32_t lo,
                                             uint32_t hi,
                                             const uint16_t *zero_ids,
                                             size_t n_zero,
                                             uint64_t seed,
                                             struct BcmnetCostProfile **out);

/**
 * Reads a `feature_name,cost` CSV profile.
 *
 * # Safety
 * As for [`bcmnet_cost_profile_sample`].
 */
enum BcmnetStatus bcmnet_cost_profile_load(const char *path,
                                           const struct BcmnetSchema *schema,
                                           struct BcmnetCostProfile **out);

/**
 * # Safety
 * `profile` must come from a profile constructor and not be freed twice.
 */
void bcmnet_cost_profile_free(struct BcmnetCostProfile *profile);

/**
 * Sums the costs of `n_ids` feature ids into `*out_cost`.
 *
 * # Safety
 * `ids` must point to `n_ids` readable u16 values; `out_cost` must be valid.
 */
enum BcmnetStatus bcmnet_model_cost(const struct BcmnetCostProfile *profile,
                                    const uint16_t *ids,
                                    size_t n_ids,
                                    uint64_t *out_cost);

/**
 * Generates a budget-sorted list of models.
 *
 * # Safety
 * All pointers must be valid; `params->hidden_layers` must point to
 * `params->n_hidden` readable u32 values. `*out` must be released with
 * [`bcmnet_schedule_free`].
 */
enum BcmnetStatus bcmnet_schedule_generate(const struct BcmnetDataset *dataset,
                                           const struct BcmnetSchema *schema,
                                           const struct BcmnetCostProfile *profile,
                                           const struct BcmnetScheduleParams *params,
                                           struct BcmnetSchedule **out);

/**
 * # Safety
 * `schedule` must come from [`bcmnet_schedule_generate`] and not be freed
 * twice.
 */
void bcmnet_schedule_free(struct BcmnetSchedule *schedule);

/**
 * Number of models in the schedule; 0 for NULL input.
 *
 * # Safety
 * `schedule` must be NULL or a pointer from [`bcmnet_schedule_generate`].
 */
size_t bcmnet_schedule_len(const struct BcmnetSchedule *schedule);

/**
 * Budget, accuracy, and model cost of entry `index` (NULL outputs are
 * skipped).
 *
 * # Safety
 * Non-NULL output pointers must be valid.
 */
enum BcmnetStatus bcmnet_schedule_entry(const struct BcmnetSchedule *schedule,
                                        size_t index,
                                        uint64_t *out_budget,
                                        double *out_accuracy,
                                        uint64_t *out_model_cost);

/**
 * Copies entry `index`'s feature ids into `out_ids` (up to `cap` values)
 * and stores the full count in `*out_len`. Call with `cap == 0` to query
 * the count first.
 *
 * # Safety
 * `out_ids` must point to `cap` writable u16 slots (or be NULL when
 * `cap == 0`); `out_len` must be valid.
 */
enum BcmnetStatus bcmnet_schedule_entry_features(const struct BcmnetSchedule *schedule,
                                                 size_t index,
                                                 uint16_t *out_ids,
                                                 size_t cap,
                                                 size_t *out_len);

/**
 * Writes the schedule's CSV table to `path`.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum BcmnetStatus bcmnet_schedule_write_csv(const struct BcmnetSchedule *schedule,
                                            const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BCMNET_H */
