#ifndef IMBALKIT_H
#define IMBALKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ImbkStatus {
  IMBK_STATUS_OK = 0,
  IMBK_STATUS_NULL_POINTER = 1,
  IMBK_STATUS_INVALID_ARGUMENT = 2,
  IMBK_STATUS_INVALID_DATA = 3,
  IMBK_STATUS_UNKNOWN_METHOD = 4,
  IMBK_STATUS_FIT_FAILED = 5,
  IMBK_STATUS_IO = 6,
  IMBK_STATUS_FORMAT = 7,
  IMBK_STATUS_PANIC = 8,
} ImbkStatus;

// Opaque dataset handle.
typedef struct ImbkDataset ImbkDataset;

// Opaque trained-model handle.
typedef struct ImbkModel ImbkModel;

typedef struct ImbkMetrics {
  double auprc;
  double macro_f1;
  double balanced_accuracy;
} ImbkMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next call into this library on the same thread.
const char *imbk_last_error(void);

// Library version as a static NUL-terminated string.
const char *imbk_version(void);

// Builds a dataset from a row-major `n x d` feature array and `n` labels in
// `0..n_classes`.
//
// # Safety
// `x` must point to `n * d` doubles, `y` to `n` labels and `out` to writable
// storage for one pointer.
enum ImbkStatus imbk_dataset_new(const double *x,
                                 size_t n,
                                 size_t d,
                                 const uint32_t *y,
                                 size_t n_classes,
                                 struct ImbkDataset **out);

// Loads an ARFF (by extension) or CSV file whose last column is the target,
// standardizing numeric columns and encoding nominal ones.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum ImbkStatus imbk_dataset_from_file(const char *path, struct ImbkDataset **out);

// # Safety
// `ds` must be NULL or a handle from this library not yet freed.
void imbk_dataset_free(struct ImbkDataset *ds);

// Writes sample, feature and class counts into any non-NULL pointer.
//
// # Safety
// `ds` must be a live dataset handle.
enum ImbkStatus imbk_dataset_shape(const struct ImbkDataset *ds,
                                   size_t *n_samples,
                                   size_t *n_features,
                                   size_t *n_classes);

// Fits `method` (for example `"spe"`) on `ds`. `params_json` is NULL or a
// JSON object of parameter overrides.
//
// # Safety
// Pointers must be valid as documented; `out` must be writable.
enum ImbkStatus imbk_model_fit(const char *method,
                               const struct ImbkDataset *ds,
                               const char *params_json,
                               uint64_t seed,
                               struct ImbkModel **out);

// # Safety
// `model` must be NULL or a handle from this library not yet freed.
void imbk_model_free(struct ImbkModel *model);

// Number of classes the model predicts.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum ImbkStatus imbk_model_n_classes(const struct ImbkModel *model, size_t *out);

// Class probabilities for `n x d` rows into `out` (`n * n_classes`
// doubles, row-major). `out_len` is the capacity of `out`.
//
// # Safety
// `x` must hold `n * d` doubles and `out` `out_len` doubles.
enum ImbkStatus imbk_model_predict_proba(const struct ImbkModel *model,
                                         const double *x,
                                         size_t n,
                                         size_t d,
                                         double *out,
                                         size_t out_len);

// Predicted class per row into `out` (`n` labels).
//
// # Safety
// `x` must hold `n * d` doubles and `out` `n` labels.
enum ImbkStatus imbk_model_predict(const struct ImbkModel *model,
                                   const double *x,
                                   size_t n,
                                   size_t d,
                                   uint32_t *out);

// # Safety
// `model` must be a live handle and `path` a NUL-terminated string.
enum ImbkStatus imbk_model_save(const struct ImbkModel *model, const char *path);

// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum ImbkStatus imbk_model_load(const char *path, struct ImbkModel **out);

// AUPRC, macro-F1 and balanced accuracy from `n` labels and an `n x k`
// row-major probability matrix.
//
// # Safety
// `y_true` must hold `n` labels, `proba` `n * k` doubles, `out` writable.
enum ImbkStatus imbk_evaluate(const uint32_t *y_true,
                              const double *proba,
                              size_t n,
                              size_t k,
                              struct ImbkMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMBALKIT_H */
