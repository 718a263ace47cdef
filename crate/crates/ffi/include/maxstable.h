#ifndef MAXSTABLE_H
#define MAXSTABLE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Estimators, passed to [`msx_estimate`] as `int32_t`; `Default` picks the
 * natural one for the model.
 */
typedef enum MsxEstimator {
  MsxEstimator_Default = 0,
  MsxEstimator_Pairwise = 1,
  MsxEstimator_Range = 2,
  MsxEstimator_Exp2d = 3,
  MsxEstimator_GeneralNormal = 4,
} MsxEstimator;

/**
 * Kernel families, passed to [`msx_model_new`] as `int32_t`.
 */
typedef enum MsxFamily {
  MsxFamily_Normal1d = 0,
  MsxFamily_Dexp1d = 1,
  MsxFamily_T1d = 2,
  MsxFamily_Normal2d = 3,
  MsxFamily_Exp2d = 4,
  MsxFamily_T2d = 5,
  MsxFamily_Gnormal2d = 6,
} MsxFamily;

/**
 * Status codes returned by every fallible function.
 */
typedef enum MsxStatus {
  MsxStatus_Ok = 0,
  /**
   * Null pointer, unknown enum value or bad length.
   */
  MsxStatus_InvalidArgument = 1,
  MsxStatus_InvalidParameter = 2,
  MsxStatus_Domain = 3,
  MsxStatus_UnsupportedModel = 4,
  MsxStatus_DimensionMismatch = 5,
  /**
   * Quadrature, simulation budget or spectral evaluation failure.
   */
  MsxStatus_Numerical = 6,
  /**
   * Tail independence, failed inversion or an unusable design.
   */
  MsxStatus_Estimation = 7,
  MsxStatus_Data = 8,
  MsxStatus_Io = 9,
  /**
   * Output buffer too small; the required size is reported.
   */
  MsxStatus_BufferTooSmall = 10,
  MsxStatus_Panic = 11,
} MsxStatus;

/**
 * Opaque kernel model.
 */
typedef struct MsxModel MsxModel;

/**
 * Opaque `n x d` sample.
 */
typedef struct MsxObservations MsxObservations;

/**
 * Opaque estimation report.
 */
typedef struct MsxReport MsxReport;

/**
 * Opaque site set.
 */
typedef struct MsxSites MsxSites;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *msx_version(void);

/**
 * Copies the calling thread's last error message into `buf`. Returns the
 * number of bytes needed including the NUL; nothing is written if `buf` is
 * null or `len` is too small. The message is empty after a successful call.
 */
size_t msx_last_error_message(char *buf, size_t len);

/**
 * Creates a kernel model.
 *
 * `params` holds, in order: `beta` for the single-scale families, followed
 * by `nu` (t1d, a positive integer) or `alpha` (t2d); `beta1, beta2, rho`
 * for gnormal2d.
 */
enum MsxStatus msx_model_new(int32_t family,
                             const double *params,
                             size_t n_params,
                             struct MsxModel **out);

/**
 * Releases a model; null is ignored.
 */
void msx_model_free(struct MsxModel *model);

/**
 * `-log P{Z(0) <= w1, Z(t) <= w2}` for displacement `t` (length 1 or 2,
 * matching the model dimension).
 */
enum MsxStatus msx_model_neg_log_cdf(const struct MsxModel *model,
                                     const double *t,
                                     size_t t_len,
                                     double w1,
                                     double w2,
                                     double *out);

/**
 * Creates a site set from `count` points of dimension `dim` (1 or 2),
 * stored point by point in `coords`.
 */
enum MsxStatus msx_sites_new(size_t dim, const double *coords, size_t count, struct MsxSites **out);

void msx_sites_free(struct MsxSites *sites);

/**
 * Wraps a row-major `n x d` sample (copied).
 */
enum MsxStatus msx_observations_new(const double *data,
                                    size_t n,
                                    size_t d,
                                    struct MsxObservations **out);

void msx_observations_free(struct MsxObservations *obs);

/**
 * Reports the sample shape.
 */
enum MsxStatus msx_observations_shape(const struct MsxObservations *obs, size_t *n, size_t *d);

/**
 * Copies the sample, row-major, into `buf` of `len` values.
 */
enum MsxStatus msx_observations_copy(const struct MsxObservations *obs, double *buf, size_t len);

/**
 * Draws `n` replications of the process at `sites` with the exact mixture
 * sampler and the given seed.
 */
enum MsxStatus msx_simulate(const struct MsxModel *model,
                            const struct MsxSites *sites,
                            size_t n,
                            uint64_t seed,
                            struct MsxObservations **out);

/**
 * Rank-based joint exceedance ratio for the selected columns (0-based) with
 * weights `x` and threshold count `k`.
 */
enum MsxStatus msx_r_hat(const struct MsxObservations *obs,
                         const size_t *columns,
                         const double *x,
                         size_t count,
                         size_t k,
                         double *out);

/**
 * Fits `model`'s family to the sample. Only the family of `model` is used;
 * its parameter values are ignored.
 */
enum MsxStatus msx_estimate(const struct MsxObservations *obs,
                            const struct MsxSites *sites,
                            const struct MsxModel *model,
                            int32_t estimator,
                            size_t k,
                            struct MsxReport **out);

void msx_report_free(struct MsxReport *report);

/**
 * Scalar range parameter estimate. Fails with `UnsupportedModel` for the
 * general normal fit, which has three parameters.
 */
enum MsxStatus msx_report_beta_hat(const struct MsxReport *report, double *out);

/**
 * General normal fit as `[beta1, beta2, rho]`.
 */
enum MsxStatus msx_report_general_normal(const struct MsxReport *report, double *out);

/**
 * Writes the full report as JSON. `needed` (may be null) receives the size
 * including the NUL, also when the buffer is too small.
 */
enum MsxStatus msx_report_json(const struct MsxReport *report,
                               char *buf,
                               size_t len,
                               size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAXSTABLE_H */
