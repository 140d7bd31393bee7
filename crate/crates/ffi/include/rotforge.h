#ifndef ROTFORGE_H
#define ROTFORGE_H

/* Generated by cbindgen from the rotforge-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RfForestKind {
  RF_FOREST_KIND_ROTATION_FOREST = 0,
  RF_FOREST_KIND_RANDOM_FOREST = 1,
  /**
   * Uses `base` and `transform` of the config.
   */
  RF_FOREST_KIND_HYBRID = 2,
} RfForestKind;

typedef enum RfStatus {
  RF_STATUS_OK = 0,
  RF_STATUS_NULL_POINTER = 1,
  RF_STATUS_INVALID_UTF8 = 2,
  RF_STATUS_NOT_FOUND = 3,
  RF_STATUS_IO = 4,
  RF_STATUS_PARSE = 5,
  RF_STATUS_INVALID_INPUT = 6,
  RF_STATUS_INVALID_CONFIG = 7,
  RF_STATUS_UNFITTED = 8,
  RF_STATUS_STATS = 9,
  RF_STATUS_BUFFER_TOO_SMALL = 10,
  RF_STATUS_PANIC = 11,
  RF_STATUS_OTHER = 12,
} RfStatus;

typedef enum RfTransform {
  RF_TRANSFORM_BAG = 0,
  RF_TRANSFORM_BAG_PCA = 1,
  RF_TRANSFORM_PCA = 2,
} RfTransform;

typedef enum RfTreeKind {
  RF_TREE_KIND_C45 = 0,
  RF_TREE_KIND_RANDOM_TREE = 1,
} RfTreeKind;

typedef struct RfDataset RfDataset;

typedef struct RfForest RfForest;

typedef struct RfTimingModel RfTimingModel;

/**
 * Forest settings. Fill with `rf_forest_config_default` and adjust.
 */
typedef struct RfForestConfig {
  enum RfForestKind kind;
  enum RfTreeKind base;
  enum RfTransform transform;
  uintptr_t trees;
  uintptr_t group_size;
  double sample_proportion;
  /**
   * Attributes per tree; 0 means all.
   */
  uintptr_t max_attributes;
  uint64_t seed;
} RfForestConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to fit) and returns the length of the full
 * message excluding the terminator; 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
uintptr_t rf_last_error_message(char *buf, uintptr_t len);

/**
 * Loads an ARFF file, or a CSV file with a header row. `class_column` is a
 * column index, name or `last`; null means `last` (CSV only).
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum RfStatus rf_dataset_load(const char *path, const char *class_column, struct RfDataset **out);

/**
 * Dataset from row-major `n × m` values and labels in `0..n_classes`.
 *
 * # Safety
 * `values` must hold `n * m` doubles, `labels` `n` entries; `out` writable.
 */
enum RfStatus rf_dataset_from_arrays(const double *values,
                                     uintptr_t n,
                                     uintptr_t m,
                                     const uintptr_t *labels,
                                     uintptr_t n_classes,
                                     struct RfDataset **out);

/**
 * # Safety
 * `d` must be null or a live dataset handle.
 */
uintptr_t rf_dataset_n_cases(const struct RfDataset *d);

/**
 * # Safety
 * `d` must be null or a live dataset handle.
 */
uintptr_t rf_dataset_n_attributes(const struct RfDataset *d);

/**
 * # Safety
 * `d` must be null or a live dataset handle.
 */
uintptr_t rf_dataset_n_classes(const struct RfDataset *d);

/**
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void rf_dataset_free(struct RfDataset *d);

/**
 * Default settings for a forest kind: rotation forest 200 trees, groups
 * of 3, proportion 0.5; random forest 500 random trees with bagging.
 */
struct RfForestConfig rf_forest_config_default(enum RfForestKind kind);

/**
 * # Safety
 * `train` and `config` must be live pointers; `out` writable.
 */
enum RfStatus rf_forest_build(const struct RfDataset *train,
                              const struct RfForestConfig *config,
                              struct RfForest **out);

/**
 * # Safety
 * `f` must be null or a live forest handle.
 */
uintptr_t rf_forest_n_trees(const struct RfForest *f);

/**
 * # Safety
 * `f` must be null or a live forest handle.
 */
uintptr_t rf_forest_n_classes(const struct RfForest *f);

/**
 * # Safety
 * `f` must be null or a live forest handle.
 */
uintptr_t rf_forest_n_attributes(const struct RfForest *f);

/**
 * Class probabilities of one case. `out` receives `n_classes` doubles.
 *
 * # Safety
 * `x` must hold `m` doubles and `out` `n_classes` writable doubles.
 */
enum RfStatus rf_forest_predict_proba(const struct RfForest *f,
                                      const double *x,
                                      uintptr_t m,
                                      double *out,
                                      uintptr_t n_classes);

/**
 * Predicted class index of one case (largest probability, lowest index on
 * ties).
 *
 * # Safety
 * `x` must hold `m` doubles; `out` must be writable.
 */
enum RfStatus rf_forest_predict(const struct RfForest *f,
                                const double *x,
                                uintptr_t m,
                                uintptr_t *out);

/**
 * # Safety
 * `f` must be live and `path` NUL-terminated.
 */
enum RfStatus rf_forest_save(const struct RfForest *f, const char *path);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` writable.
 */
enum RfStatus rf_forest_load(const char *path, struct RfForest **out);

/**
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void rf_forest_free(struct RfForest *f);

/**
 * The published timing model (hours).
 *
 * # Safety
 * `out` must be writable.
 */
enum RfStatus rf_timing_published(struct RfTimingModel **out);

/**
 * Fits the timing model to `len` observed full builds, times in seconds.
 *
 * # Safety
 * `n`, `m` and `seconds` must each hold `len` entries; `out` writable.
 */
enum RfStatus rf_timing_fit(const uintptr_t *n,
                            const uintptr_t *m,
                            const double *seconds,
                            uintptr_t len,
                            bool include_nlogn,
                            struct RfTimingModel **out);

/**
 * Point prediction in seconds.
 *
 * # Safety
 * `tm` must be live; `out` writable.
 */
enum RfStatus rf_timing_predict_seconds(const struct RfTimingModel *tm,
                                        double n,
                                        double m,
                                        double *out);

/**
 * Two-sided `1 − alpha` prediction interval in seconds. Fails with
 * `UNFITTED` for models without a design matrix.
 *
 * # Safety
 * `tm` must be live; `lo` and `hi` writable.
 */
enum RfStatus rf_timing_interval_seconds(const struct RfTimingModel *tm,
                                         double n,
                                         double m,
                                         double alpha,
                                         double *lo,
                                         double *hi);

/**
 * # Safety
 * `tm` must be null or a handle not yet freed.
 */
void rf_timing_free(struct RfTimingModel *tm);

/**
 * Two-sided Wilcoxon signed-rank p-value of paired samples.
 *
 * # Safety
 * `x` and `y` must hold `len` doubles; `p` writable.
 */
enum RfStatus rf_stats_wilcoxon(const double *x, const double *y, uintptr_t len, double *p);

/**
 * Two-sided paired t-test p-value.
 *
 * # Safety
 * `x` and `y` must hold `len` doubles; `p` writable.
 */
enum RfStatus rf_stats_paired_t(const double *x, const double *y, uintptr_t len, double *p);

/**
 * Friedman test on a row-major `n_datasets × n_classifiers` matrix.
 * `mean_ranks` may be null or receive `n_classifiers` doubles.
 *
 * # Safety
 * `values` must hold `n_datasets * n_classifiers` doubles; outputs
 * writable.
 */
enum RfStatus rf_stats_friedman(const double *values,
                                uintptr_t n_datasets,
                                uintptr_t n_classifiers,
                                bool lower_is_better,
                                double *statistic,
                                double *p,
                                double *mean_ranks);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROTFORGE_H */
