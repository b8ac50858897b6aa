#ifndef SAAC_H
#define SAAC_H

/* C interface to the population estimation pipeline. Every function that can
 * fail returns a saac_status; the message of the most recent failure on the
 * calling thread is available from saac_last_error(). */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SAAC_API __declspec(dllexport)
#else
#define SAAC_API __attribute__((visibility("default")))
#endif

typedef enum saac_status {
  SAAC_OK = 0,
  SAAC_ERR_INVALID_ARGUMENT = 1,
  SAAC_ERR_VALIDATION = 2,
  SAAC_ERR_NO_BASELINE = 3,
  SAAC_ERR_UNRESOLVED = 4,
  SAAC_ERR_INFEASIBLE = 5,
  SAAC_ERR_EMPTY_MONTH = 6,
  SAAC_ERR_SHAPE = 7,
  SAAC_ERR_CONFIG = 8,
  SAAC_ERR_IO = 9,
  SAAC_ERR_BUFFER_TOO_SMALL = 10,
  SAAC_ERR_INTERNAL = 11
} saac_status;

typedef enum saac_log_level { SAAC_LOG_INFO = 0, SAAC_LOG_WARNING = 1, SAAC_LOG_ERROR = 2 } saac_log_level;

typedef struct saac_config saac_config;
typedef struct saac_result saac_result;

SAAC_API const char* saac_version(void);
SAAC_API const char* saac_status_name(saac_status status);
/* Message of the last failure on this thread; "" when none. */
SAAC_API const char* saac_last_error(void);
/* Process exit status for a run outcome: 0 ok, 1 validation, 2 infeasibility. */
SAAC_API int saac_exit_code(saac_status status);

/* Routes pipeline log lines to `callback`; NULL restores the stderr default. */
typedef void (*saac_log_callback)(saac_log_level level, const char* message, void* user);
SAAC_API void saac_set_log_callback(saac_log_callback callback, void* user);

SAAC_API saac_status saac_config_create(saac_config** out);
SAAC_API void saac_config_destroy(saac_config* config);
/* Merges a JSON config file (nested objects or dotted keys). */
SAAC_API saac_status saac_config_load_file(saac_config* config, const char* path);
/* Sets one dotted key, e.g. "ipf.tol" = "1e-10". */
SAAC_API saac_status saac_config_set(saac_config* config, const char* key, const char* value);
/* Full config snapshot as JSON; release with saac_string_free. */
SAAC_API saac_status saac_config_to_json(const saac_config* config, char** out);
SAAC_API void saac_string_free(char* text);

/* subcommand: simulate, calibrate, inbound, outbound, assemble, evaluate, all.
 * On success *out holds the manifest and artifact list. */
SAAC_API saac_status saac_run(const saac_config* config, const char* subcommand, saac_result** out);
SAAC_API const char* saac_result_manifest(const saac_result* result);
SAAC_API size_t saac_result_artifact_count(const saac_result* result);
SAAC_API const char* saac_result_artifact(const saac_result* result, size_t index);
SAAC_API void saac_result_destroy(saac_result* result);

/* Numerical kernels. */
SAAC_API saac_status saac_savgol_smooth(const double* values, size_t n, int window, int order, double* out);

typedef struct saac_peak {
  size_t index;
  double height;
  double prominence;
  double width;
  size_t left_base;
  size_t right_base;
} saac_peak;

/* Writes up to `capacity` peaks; *count receives the total found. Returns
 * SAAC_ERR_BUFFER_TOO_SMALL when capacity < *count. */
SAAC_API saac_status saac_find_peaks(const double* values, size_t n, double min_height, double min_prominence,
                                     size_t min_distance, double min_width, saac_peak* out, size_t capacity,
                                     size_t* count);

SAAC_API saac_status saac_percentile(const double* values, size_t n, double q, double* out);

/* Balances a uniform seed to the given marginals. `out` is n_rows x n_cols,
 * row-major. iterations and max_deviation may be NULL. */
SAAC_API saac_status saac_ipf(const double* rows, size_t n_rows, const double* cols, size_t n_cols, double tol,
                              int max_iter, double* out, int* iterations, double* max_deviation);

#ifdef __cplusplus
}
#endif

#endif
