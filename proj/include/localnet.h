/* localnet — manifold-localized deep-net regression, C API.
 *
 * Every function returns a localnet_status; LOCALNET_OK means success.
 * On failure, localnet_last_error() returns a message describing what went
 * wrong (thread-local storage). Handles are opaque and must be released
 * with their _close function.
 *
 * Configuration documents are JSON strings; see the README for the schema.
 * Top-level keys can be overridden with LOCALNET_* environment variables.
 */
#ifndef LOCALNET_H
#define LOCALNET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum localnet_status {
    LOCALNET_OK = 0,
    LOCALNET_ERR_INVALID_ARGUMENT = 1,
    LOCALNET_ERR_DOMAIN = 2,
    LOCALNET_ERR_CONFIG = 3,
    LOCALNET_ERR_IO = 4,
    LOCALNET_ERR_INTERNAL = 5
} localnet_status;

typedef enum localnet_mode {
    LOCALNET_MODE_LITERAL = 0,
    LOCALNET_MODE_INTERIOR = 1,
    LOCALNET_MODE_FEEDBACK = 2,
    /* feedback with the query-side cube gate disabled: chart-cell indicators
     * are evaluated over every sampled cube, not just cubes containing x */
    LOCALNET_MODE_FEEDBACK_UNGATED = 3
} localnet_mode;

typedef struct localnet_estimator localnet_estimator;

const char* localnet_version(void);

/* Message for the most recent failure on this thread ("" if none). */
const char* localnet_last_error(void);

/* Generate a dataset CSV (x_1..x_D,y) from a config JSON string. */
localnet_status localnet_generate(const char* config_json, const char* out_csv_path);

/* Build an atlas + estimator from a config and a dataset CSV, writing the
 * estimator JSON document to out_estimator_path. */
localnet_status localnet_fit(const char* config_json, const char* data_csv_path,
                             const char* out_estimator_path);

/* Load / release an estimator document produced by localnet_fit. */
localnet_status localnet_estimator_open(const char* estimator_json_path, localnet_estimator** out);
void localnet_estimator_close(localnet_estimator* est);

localnet_status localnet_estimator_ambient_dim(const localnet_estimator* est, int* out_dim);

/* Predict at a single point (length = ambient dimension). */
localnet_status localnet_estimator_predict(const localnet_estimator* est, const double* x, size_t dim,
                                           localnet_mode mode, double* out_prediction);

/* Active-set diagnostics at a point: |Lambda_x|, |Lambda_{x,S}|, |Lambda'_{x,S}|. */
localnet_status localnet_estimator_lambda(const localnet_estimator* est, const double* x, size_t dim,
                                          size_t* out_lambda_x, size_t* out_lambda_xs,
                                          size_t* out_lambda_xs_prime);

/* Batch prediction: queries CSV in, predictions CSV out
 * (x_1..x_D,prediction,mode,lambda_x,lambda_xs,lambda_xs_prime). */
localnet_status localnet_predict_csv(const localnet_estimator* est, const char* queries_csv_path,
                                     localnet_mode mode, const char* out_csv_path);

/* Rate sweep over config.m_values; writes a JSON (or CSV) result document. */
localnet_status localnet_rates(const char* config_json, const char* out_path, const char* format);

/* Literal-vs-feedback comparison under the configured distribution. */
localnet_status localnet_compare_feedback(const char* config_json, const char* out_json_path);

/* Re-embedding comparison across config.ambient_dims. */
localnet_status localnet_compare_dims(const char* config_json, const char* out_json_path);

/* Monte-Carlo verification suite; writes a JSON array of report objects.
 * config_json may be NULL for defaults. */
localnet_status localnet_verify(const char* config_json, const char* out_json_path);

#ifdef __cplusplus
}
#endif

#endif /* LOCALNET_H */
