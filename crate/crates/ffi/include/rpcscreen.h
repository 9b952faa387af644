#ifndef RPCSCREEN_H
#define RPCSCREEN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes; values 2 to 5 match the command-line exit codes.
 */
typedef enum RpcStatus {
  RPC_STATUS_OK = 0,
  RPC_STATUS_NULL_POINTER = 1,
  RPC_STATUS_INVALID_ARGUMENT = 2,
  RPC_STATUS_IO = 3,
  RPC_STATUS_INVALID_DATA = 4,
  RPC_STATUS_NUMERICAL = 5,
  RPC_STATUS_BUFFER_TOO_SMALL = 6,
  RPC_STATUS_PANIC = 7,
} RpcStatus;

/*
 Per-predictor vectors held by an [`RpcFit`].
 */
typedef enum RpcFitField {
  RPC_FIT_FIELD_SCORES = 0,
  RPC_FIT_FIELD_V_IY = 1,
  RPC_FIT_FIELD_VI = 2,
  RPC_FIT_FIELD_XI = 3,
  RPC_FIT_FIELD_RIDGE_BETA = 4,
} RpcFitField;

/*
 Standardized predictors and response.
 */
typedef struct RpcDataset RpcDataset;

/*
 Ridge partial correlation components for one penalty.
 */
typedef struct RpcFit RpcFit;

/*
 Scalar parts of an [`RpcFit`].
 */
typedef struct RpcFitScalars {
  double lambda;
  double v_y;
  double s_lambda;
} RpcFitScalars;

/*
 The penalties `p/n`, `n ln(n)/p` and `n/p`.
 */
typedef struct RpcLambdaPresets {
  double rpc1;
  double rpc2;
  double rpc3;
} RpcLambdaPresets;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or null. Valid until the next
 call into the library from this thread.
 */
const char *rpc_last_error_message(void);

/*
 Library version as a static nul-terminated string.
 */
const char *rpc_version(void);

/*
 Copies and standardizes `x` (n×p, column-major) and `y` (length n).

 # Safety
 `x` must point to `n * p` doubles, `y` to `n` doubles and `out` to writable
 storage for one handle.
 */
enum RpcStatus rpc_dataset_new(const double *x,
                               const double *y,
                               size_t n,
                               size_t p,
                               struct RpcDataset **out);

/*
 # Safety
 `dataset` must be null or a handle from [`rpc_dataset_new`] not yet freed.
 */
void rpc_dataset_free(struct RpcDataset *dataset);

/*
 # Safety
 `dataset` must be a live handle.
 */
size_t rpc_dataset_n(const struct RpcDataset *dataset);

/*
 # Safety
 `dataset` must be a live handle.
 */
size_t rpc_dataset_p(const struct RpcDataset *dataset);

/*
 Ridge partial correlations at `lambda` by the fast algorithm.

 # Safety
 `dataset` must be a live handle and `out` writable storage for one handle.
 */
enum RpcStatus rpc_fit_new(const struct RpcDataset *dataset, double lambda, struct RpcFit **out);

/*
 # Safety
 `fit` must be null or a handle from [`rpc_fit_new`] not yet freed.
 */
void rpc_fit_free(struct RpcFit *fit);

/*
 # Safety
 `fit` must be a live handle and `out` writable.
 */
enum RpcStatus rpc_fit_scalars(const struct RpcFit *fit, struct RpcFitScalars *out);

/*
 Copies one per-predictor vector (length p) into `out`.

 # Safety
 `fit` must be a live handle and `out` must point to `len` writable doubles.
 */
enum RpcStatus rpc_fit_copy(const struct RpcFit *fit,
                            enum RpcFitField field,
                            double *out,
                            size_t len);

/*
 HOLP ridge coefficients at `lambda` into `out` (length ≥ p).

 # Safety
 `dataset` must be a live handle and `out` must point to `len` writable doubles.
 */
enum RpcStatus rpc_holp_scores(const struct RpcDataset *dataset,
                               double lambda,
                               double *out,
                               size_t len);

/*
 Marginal correlations into `out` (length ≥ p).

 # Safety
 `dataset` must be a live handle and `out` must point to `len` writable doubles.
 */
enum RpcStatus rpc_sis_scores(const struct RpcDataset *dataset, double *out, size_t len);

/*
 Forward regression for `k` steps; entry order into `out` (length ≥ k).

 # Safety
 `dataset` must be a live handle and `out` must point to `len` writable slots.
 */
enum RpcStatus rpc_fr_screen(const struct RpcDataset *dataset, size_t k, size_t *out, size_t len);

/*
 Indices of the `k` largest `|scores|`, best first, into `out` (length ≥ k).

 # Safety
 `scores` must point to `p` doubles and `out` to `len` writable slots.
 */
enum RpcStatus rpc_select_top_k(const double *scores, size_t p, size_t k, size_t *out, size_t len);

/*
 # Safety
 `out` must be writable.
 */
enum RpcStatus rpc_lambda_presets(size_t n, size_t p, struct RpcLambdaPresets *out);

/*
 Runs a benchmark plan given as JSON and returns the per-design summaries
 as a JSON array in `*out_json`, to be released with [`rpc_string_free`].

 # Safety
 `plan_json` must be a nul-terminated string and `out_json` writable.
 */
enum RpcStatus rpc_simulate_json(const char *plan_json, char **out_json);

/*
 # Safety
 `s` must be null or a string returned by this library, not yet freed.
 */
void rpc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RPCSCREEN_H */
