/*
 * Copyright 2026 The colocate Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef COLOCATE_H
#define COLOCATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ColocateStatus {
  COLOCATE_STATUS_OK = 0,
  COLOCATE_STATUS_NULL_POINTER = 1,
  COLOCATE_STATUS_INVALID_ARGUMENT = 2,
  COLOCATE_STATUS_PARSE = 3,
  COLOCATE_STATUS_IO = 4,
  COLOCATE_STATUS_UNDEFINED_CONFIDENCE = 5,
  COLOCATE_STATUS_PANIC = 6,
} ColocateStatus;

// A parsed spatial dataset.
typedef struct ColocateDataset ColocateDataset;

// Probabilistic transactions derived from a dataset.
typedef struct ColocateTransactions ColocateTransactions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Reads a dataset CSV (`id,feature,shape_type,coords,amount[,radius]`).
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum ColocateStatus colocate_dataset_from_csv(const char *path, struct ColocateDataset **out);

// # Safety
// `ds` must be a live dataset handle and `out` a valid pointer.
enum ColocateStatus colocate_dataset_len(const struct ColocateDataset *ds, uintptr_t *out);

// # Safety
// `ds` must be null or a handle not yet freed.
void colocate_dataset_free(struct ColocateDataset *ds);

// Transactionizes a dataset. A `spacing` of 0 or less picks one from the
// buffer sizes. `model` is `curve`, `linear`, `certain` or
// `categorical:ub=p,...`; null means `curve`.
//
// # Safety
// `ds` must be a live dataset handle, `model` null or NUL-terminated,
// `out` a valid pointer.
enum ColocateStatus colocate_transactions_new(const struct ColocateDataset *ds,
                                              double spacing,
                                              const char *model,
                                              struct ColocateTransactions **out);

// # Safety
// `ts` must be a live handle and `out` a valid pointer.
enum ColocateStatus colocate_transactions_len(const struct ColocateTransactions *ts,
                                              uintptr_t *out);

// # Safety
// `ts` must be null or a handle not yet freed.
void colocate_transactions_free(struct ColocateTransactions *ts);

// Expected support of a pattern written `A+B+C`.
//
// # Safety
// `ts` must be a live handle, `pattern` NUL-terminated, `out` valid.
enum ColocateStatus colocate_expected_support(const struct ColocateTransactions *ts,
                                              const char *pattern,
                                              double *out);

// Expected confidence of a rule written `A+B->C`. Returns
// `COLOCATE_STATUS_UNDEFINED_CONFIDENCE` when the antecedent never occurs.
//
// # Safety
// `ts` must be a live handle, `rule` NUL-terminated, `out` valid.
enum ColocateStatus colocate_expected_confidence(const struct ColocateTransactions *ts,
                                                 const char *rule,
                                                 double *out);

// `(exceedances + 1) / (runs + 1)`.
double colocate_p_value(uintptr_t exceedances, uintptr_t runs);

// Runs the miner on a JSON run configuration (the `config` object of a
// manifest; omitted fields take their defaults) and returns the report as
// JSON. Nothing is written to disk.
//
// # Safety
// `config_json` must be NUL-terminated and `out` a valid pointer. The
// returned string must be released with [`colocate_string_free`].
enum ColocateStatus colocate_mine_json(const char *config_json, char **out);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void colocate_string_free(char *s);

// Message for the last failed call on this thread, or null. Valid until
// the next call into the library from the same thread.
const char *colocate_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLOCATE_H */
