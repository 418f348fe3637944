/* C interface of the jkoflow library. All handles are opaque; every function
 * returns a status code (JKF_OK on success). On failure the message is
 * available from jkf_last_error() on the calling thread. Strings returned
 * through char** out-parameters are owned by the caller and released with
 * jkf_string_free(). */
#ifndef JKOFLOW_H
#define JKOFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define JKF_API __declspec(dllexport)
#else
#define JKF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jkf_status {
  JKF_OK = 0,
  JKF_ERR_DOMAIN = 1,
  JKF_ERR_INVALID_ARGUMENT = 2,
  JKF_ERR_CONSTRAINT = 3,
  JKF_ERR_NO_SOLUTION = 4,
  JKF_ERR_STEP_FAILURE = 5,
  JKF_ERR_CFL = 6,
  JKF_ERR_ORACLE = 7,
  JKF_ERR_IO = 8,
  JKF_ERR_CONFIG = 9,
  JKF_ERR_INTERNAL = 99
} jkf_status;

typedef enum jkf_family {
  JKF_LOG_LOG = 0,
  JKF_LOG_POW = 1,
  JKF_POW_POW_EQUAL = 2,
  JKF_POW_POW = 3
} jkf_family;

typedef enum jkf_regime { JKF_THREE_PHASE = 0, JKF_TWO_PHASE = 1, JKF_PURE = 2 } jkf_regime;

typedef struct jkf_config jkf_config;
typedef struct jkf_entropy jkf_entropy;
typedef struct jkf_density jkf_density;

JKF_API const char* jkf_last_error(void);
JKF_API const char* jkf_status_name(int status);
JKF_API void jkf_string_free(char* s);

/* Configuration. */
JKF_API int jkf_config_load(const char* path, jkf_config** out);
JKF_API int jkf_config_parse(const char* json_text, const char* base_dir, jkf_config** out);
JKF_API int jkf_config_set_seed(jkf_config* cfg, uint64_t seed);
JKF_API int jkf_config_set_frames_every(jkf_config* cfg, uint64_t frames_every);
JKF_API int jkf_config_fingerprint(const jkf_config* cfg, char** out);
JKF_API void jkf_config_free(jkf_config* cfg);

/* Commands. Each writes its artifacts under out_dir and, when summary_json is
 * not NULL, returns the JSON summary. jkf_run returns JKF_ERR_STEP_FAILURE
 * after writing the partial artifacts when a step fails. */
JKF_API int jkf_run(const jkf_config* cfg, const char* out_dir, char** summary_json);
JKF_API int jkf_step(const jkf_config* cfg, const char* out_dir, char** summary_json);
JKF_API int jkf_compare(const jkf_config* cfg, size_t levels, const char* out_dir,
                        char** summary_json);
JKF_API int jkf_contraction(const jkf_config* a, const jkf_config* b, const char* out_dir,
                            char** summary_json);
JKF_API int jkf_contraction_random(const jkf_config* cfg, size_t pairs, const char* out_dir,
                                   char** summary_json);
JKF_API int jkf_validate_entropy(const jkf_config* cfg, size_t samples, const char* out_dir,
                                 char** summary_json);
JKF_API int jkf_stationary(double l, size_t n, const char* out_dir, char** summary_json);

/* Entropy evaluation. m and r are ignored by families that do not use them. */
JKF_API int jkf_entropy_create(jkf_family family, double m, double r, jkf_entropy** out);
JKF_API void jkf_entropy_free(jkf_entropy* s);
JKF_API int jkf_entropy_value(const jkf_entropy* s, double rho, double* out);
JKF_API int jkf_entropy_subdifferential(const jkf_entropy* s, double rho, double* lo, double* hi);
JKF_API int jkf_entropy_inverse(const jkf_entropy* s, double v, double* out);
JKF_API int jkf_entropy_l_s(const jkf_entropy* s, double rho, double p, double* out);

/* Grid densities on [0, l]; values must carry unit mass. */
JKF_API int jkf_density_create(double l, const double* values, size_t n, jkf_density** out);
JKF_API void jkf_density_free(jkf_density* d);
JKF_API int jkf_density_quantile(const jkf_density* d, double s, double* out);
JKF_API int jkf_wasserstein2(const jkf_density* a, const jkf_density* b, double* out);
JKF_API int jkf_lp_distance(const jkf_density* a, const jkf_density* b, double p, double* out);

/* Stationary log-log profile with Phi = 2x on [0, l]. */
JKF_API int jkf_stationary_profile(double l, jkf_regime* regime, double* breakpoint);

#ifdef __cplusplus
}
#endif

#endif
