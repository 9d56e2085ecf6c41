#ifndef SMCF_H
#define SMCF_H

/* C interface to the spacelike mean curvature flow library.
 *
 * Every object is an opaque handle owned by the caller and released with the
 * matching *_free function. Functions return an smcf_status; on failure the
 * message is available from smcf_last_error() on the same thread until the
 * next call. Strings returned through out-parameters are freed with
 * smcf_free_string. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SMCF_BUILDING)
#    define SMCF_API __declspec(dllexport)
#  else
#    define SMCF_API __declspec(dllimport)
#  endif
#else
#  define SMCF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum smcf_status {
  SMCF_OK = 0,
  SMCF_ERR_CONFIG = 1,
  SMCF_ERR_DIMENSION = 2,
  SMCF_ERR_RANGE = 3,
  SMCF_ERR_PRECONDITION = 4,
  SMCF_ERR_SPACELIKE = 5,
  SMCF_ERR_BLOWUP = 6,
  SMCF_ERR_IO = 7,
  SMCF_ERR_INVALID_ARGUMENT = 8,
  SMCF_ERR_INTERNAL = 9
} smcf_status;

typedef enum smcf_causal {
  SMCF_SPACELIKE = 0,
  SMCF_NULL = 1,
  SMCF_TIMELIKE = 2
} smcf_causal;

typedef struct smcf_config smcf_config;
typedef struct smcf_state smcf_state;
typedef struct smcf_trajectory smcf_trajectory;
typedef struct smcf_report smcf_report;

SMCF_API const char* smcf_version(void);
SMCF_API const char* smcf_last_error(void);
SMCF_API const char* smcf_status_name(smcf_status s);
SMCF_API void smcf_free_string(char* s);

/* configuration */
SMCF_API smcf_status smcf_config_parse(const char* json_text, smcf_config** out);
SMCF_API smcf_status smcf_config_load(const char* path, smcf_config** out);
/* Reparses the document with one dotted-path assignment applied. */
SMCF_API smcf_status smcf_config_override(smcf_config* cfg, const char* assignment);
SMCF_API smcf_status smcf_config_to_json(const smcf_config* cfg, char** json_out);
/* Borrowed; valid while cfg lives and is not overridden. */
SMCF_API const char* smcf_config_output_dir(const smcf_config* cfg);
SMCF_API smcf_status smcf_config_hash(const smcf_config* cfg, char** hash_out);
SMCF_API void smcf_config_free(smcf_config* cfg);

/* graph states */
SMCF_API smcf_status smcf_state_from_config(const smcf_config* cfg, smcf_state** out);
SMCF_API smcf_status smcf_state_read(const char* path, smcf_state** out);
SMCF_API smcf_status smcf_state_write(const smcf_state* s, const char* path);
SMCF_API int smcf_state_n(const smcf_state* s);
SMCF_API int smcf_state_m(const smcf_state* s);
SMCF_API double smcf_state_t(const smcf_state* s);
SMCF_API size_t smcf_state_size(const smcf_state* s);
/* Borrowed pointer to the node-major values; valid while s lives. */
SMCF_API const double* smcf_state_values(const smcf_state* s);
SMCF_API void smcf_state_free(smcf_state* s);

/* flow */
SMCF_API smcf_status smcf_run(const smcf_config* cfg, const smcf_state* initial,
                              smcf_trajectory** out);
SMCF_API size_t smcf_trajectory_snapshot_count(const smcf_trajectory* tr);
SMCF_API size_t smcf_trajectory_step_count(const smcf_trajectory* tr);
SMCF_API int smcf_trajectory_steady(const smcf_trajectory* tr);
SMCF_API smcf_status smcf_trajectory_snapshot(const smcf_trajectory* tr, size_t index,
                                              smcf_state** out);
SMCF_API smcf_status smcf_trajectory_write_csv(const smcf_trajectory* tr, const char* path);
SMCF_API void smcf_trajectory_free(smcf_trajectory* tr);

/* estimate checks: displacement, H_decay, gradient, tame, dirichlet_boundary_H */
SMCF_API smcf_status smcf_verify(const smcf_trajectory* tr, const char* check,
                                 smcf_report** out);
SMCF_API int smcf_report_pass(const smcf_report* r);
SMCF_API double smcf_report_worst_margin(const smcf_report* r);
SMCF_API double smcf_report_worst_t(const smcf_report* r);
SMCF_API int64_t smcf_report_worst_node(const smcf_report* r);
SMCF_API double smcf_report_tolerance(const smcf_report* r);
SMCF_API void smcf_report_free(smcf_report* r);

/* Whole experiments as run by the command-line tool. command is one of
 * run, verify, oracle, renorm, g2. resume_snapshot may be NULL. The results
 * document is returned through results_json when that is not NULL. */
SMCF_API smcf_status smcf_experiment(const smcf_config* cfg, const char* command,
                                     const char* out_dir, const char* resume_snapshot,
                                     int* passed, char** results_json);

/* pointwise geometry in R^{n,m}: x and y hold n spatial then m vertical
 * components */
SMCF_API smcf_status smcf_minkowski_ip(const double* x, const double* y, int n, int m,
                                       double* out);
SMCF_API smcf_status smcf_causal_class(const double* x, int n, int m, smcf_causal* out);

#ifdef __cplusplus
}
#endif

#endif
