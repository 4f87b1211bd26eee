#ifndef KHERD_H
#define KHERD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum KherdStatus {
  KherdStatus_Ok = 0,
  KherdStatus_NullPointer = 1,
  KherdStatus_InvalidInput = 2,
  KherdStatus_Io = 3,
  KherdStatus_BudgetExceedsGroundSet = 4,
  KherdStatus_Numerical = 5,
  KherdStatus_Parse = 6,
  KherdStatus_Panic = 7,
} KherdStatus;

typedef enum KherdKernelKind {
  KherdKernelKind_Gaussian = 0,
  KherdKernelKind_Laplacian = 1,
  KherdKernelKind_Polynomial = 2,
} KherdKernelKind;

/**
 * Opaque kernel context handle (kernel, cached mean similarities, optional Gram matrix).
 */
typedef struct KherdContext KherdContext;

/**
 * Opaque dataset handle.
 */
typedef struct KherdDataset KherdDataset;

/**
 * Kernel parameters. `sigma` is used by the gaussian and laplacian kernels,
 * `degree` and `offset` by the polynomial one.
 */
typedef struct KherdKernel {
  enum KherdKernelKind kind;
  double sigma;
  uint32_t degree;
  double offset;
} KherdKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next `kherd_*` call on the same thread.
 */
const char *kherd_last_error(void);

/**
 * Copies `n * d` row-major values into a new dataset.
 *
 * # Safety
 * `features` must point to `n * d` readable doubles; `out` must be writable.
 */
enum KherdStatus kherd_dataset_new(const double *features,
                                   size_t n,
                                   size_t d,
                                   struct KherdDataset **out_ds);

/**
 * Loads a CSV or RDSB file, chosen by extension.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` must be writable.
 */
enum KherdStatus kherd_dataset_load(const char *path, struct KherdDataset **out_ds);

/**
 * # Safety
 * `ds` must be NULL or a handle from `kherd_dataset_new`/`kherd_dataset_load`
 * that has not been freed.
 */
void kherd_dataset_free(struct KherdDataset *ds);

/**
 * Number of points; 0 for NULL.
 *
 * # Safety
 * `ds` must be NULL or a live dataset handle.
 */
size_t kherd_dataset_n(const struct KherdDataset *ds);

/**
 * Dimension; 0 for NULL.
 *
 * # Safety
 * `ds` must be NULL or a live dataset handle.
 */
size_t kherd_dataset_d(const struct KherdDataset *ds);

/**
 * Median pairwise Euclidean distance.
 *
 * # Safety
 * `ds` must be a live dataset handle; `out_sigma` must be writable.
 */
enum KherdStatus kherd_median_bandwidth(const struct KherdDataset *ds, double *out_sigma);

/**
 * Builds a kernel context over a copy of the dataset. With `cache_gram`
 * the full n×n matrix is kept; otherwise rows are recomputed on demand.
 *
 * # Safety
 * `ds` must be a live dataset handle; `out_ctx` must be writable.
 */
enum KherdStatus kherd_context_new(const struct KherdDataset *ds,
                                   struct KherdKernel kernel,
                                   bool cache_gram,
                                   struct KherdContext **out_ctx);

/**
 * # Safety
 * `ctx` must be NULL or a live context handle.
 */
void kherd_context_free(struct KherdContext *ctx);

/**
 * Mean of all pairwise kernel values; NaN for NULL.
 *
 * # Safety
 * `ctx` must be NULL or a live context handle.
 */
double kherd_context_kbar(const struct KherdContext *ctx);

/**
 * Greedy selection without replacement. Writes `m` indices in selection
 * order and, if `out_value` is non-NULL, the final α-MMD².
 *
 * # Safety
 * `ctx` must be a live context handle; `out_indices` must have room for `m`
 * entries; `out_value` must be NULL or writable.
 */
enum KherdStatus kherd_gkhr(const struct KherdContext *ctx,
                            size_t m,
                            double alpha,
                            size_t *out_indices,
                            double *out_value);

/**
 * Greedy selection with replacement; indices may repeat.
 *
 * # Safety
 * Same contract as [`kherd_gkhr`].
 */
enum KherdStatus kherd_gkh(const struct KherdContext *ctx,
                           size_t m,
                           double alpha,
                           size_t *out_indices,
                           double *out_value);

/**
 * α-MMD² of the multiset `indices[0..m]`.
 *
 * # Safety
 * `ctx` must be a live context handle; `indices` must point to `m` entries;
 * `out_value` must be writable.
 */
enum KherdStatus kherd_alpha_mmd_sq(const struct KherdContext *ctx,
                                    const size_t *indices,
                                    size_t m,
                                    double alpha,
                                    double *out_value);

/**
 * Classical MMD² (α = 1).
 *
 * # Safety
 * Same contract as [`kherd_alpha_mmd_sq`].
 */
enum KherdStatus kherd_mmd_sq(const struct KherdContext *ctx,
                              const size_t *indices,
                              size_t m,
                              double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KHERD_H */
