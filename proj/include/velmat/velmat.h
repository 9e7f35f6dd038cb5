#ifndef VELMAT_VELMAT_H
#define VELMAT_VELMAT_H

/* C interface to the velmat library. Every function returns a status code;
 * on failure velmat_last_error() describes the problem (thread-local).
 * Strings returned through char** out-parameters are owned by the caller and
 * released with velmat_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(VELMAT_BUILDING_LIBRARY)
#define VELMAT_API __declspec(dllexport)
#else
#define VELMAT_API __declspec(dllimport)
#endif
#else
#define VELMAT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum velmat_status {
  VELMAT_OK = 0,
  VELMAT_INVALID_ARGUMENT = 1,
  VELMAT_SCENARIO_ERROR = 2,
  VELMAT_NUMERICAL_ERROR = 3,
  VELMAT_INCONCLUSIVE = 4
} velmat_status;

typedef enum velmat_distance_mode { VELMAT_DISTANCE_GEODESIC = 0, VELMAT_DISTANCE_ARRIVAL = 1 } velmat_distance_mode;

typedef struct velmat_scenario velmat_scenario;
typedef struct velmat_system velmat_system;

typedef struct velmat_run_options {
  uint64_t seed;
  int strict; /* nonzero: an inconclusive verdict returns VELMAT_INCONCLUSIVE */
  int inject_majorant_fault; /* verify only: scale the majorant by 0.9 */
} velmat_run_options;

VELMAT_API const char* velmat_version(void);
VELMAT_API const char* velmat_last_error(void);
VELMAT_API velmat_run_options velmat_default_run_options(void);
VELMAT_API void velmat_string_free(char* s);

/* ---- scenarios ---- */
VELMAT_API velmat_status velmat_scenario_load(const char* path, velmat_scenario** out);
VELMAT_API velmat_status velmat_scenario_parse(const char* json_text, velmat_scenario** out);
/* Canonical JSON with every default spelled out. */
VELMAT_API velmat_status velmat_scenario_to_json(const velmat_scenario* s, char** json_out);
VELMAT_API velmat_status velmat_scenario_set_output_dir(velmat_scenario* s, const char* dir);
VELMAT_API void velmat_scenario_free(velmat_scenario* s);

/* ---- commands (write their files under the scenario's output dir) ---- */
VELMAT_API velmat_status velmat_cmd_analyze(const velmat_scenario* s, const velmat_run_options* opt,
                                            char** summary_out);
VELMAT_API velmat_status velmat_cmd_distance(const velmat_scenario* s, velmat_distance_mode mode,
                                             const velmat_run_options* opt, char** summary_out);
VELMAT_API velmat_status velmat_cmd_simulate(const velmat_scenario* s, const velmat_run_options* opt,
                                             char** summary_out);
/* Runs the invariant suite; filter is a regex over invariant ids (NULL or ""
 * for all). failures_out receives the number of failing invariants. */
VELMAT_API velmat_status velmat_cmd_verify(const velmat_run_options* opt, const char* filter, char** table_out,
                                           int* failures_out);

/* ---- systems ---- */
/* Built-in by name (telegraph, maxwell_isotropic, maxwell_anisotropic,
 * elastic_isotropic, elastic, dirac_free, custom) with a JSON params object,
 * on the box [lower, upper]^dim. */
VELMAT_API velmat_status velmat_system_builtin(const char* name, const char* params_json, int dim,
                                               const double* lower, const double* upper, velmat_system** out);
VELMAT_API velmat_status velmat_system_from_scenario(const velmat_scenario* s, velmat_system** out);
VELMAT_API void velmat_system_free(velmat_system* sys);
VELMAT_API velmat_status velmat_system_dims(const velmat_system* sys, int* dim, size_t* k);
/* M(x) written row-major into m_out (dim * dim doubles). */
VELMAT_API velmat_status velmat_system_velocity_matrix(const velmat_system* sys, const double* x, double* m_out);
VELMAT_API velmat_status velmat_system_char_speed(const velmat_system* sys, const double* x, const double* n,
                                                  double* speed_out);
VELMAT_API velmat_status velmat_system_chernoff(const velmat_system* sys, const double* x, double* lower_out,
                                                double* upper_out);
/* passed_out: 1 when every structural check holds. */
VELMAT_API velmat_status velmat_system_validate(const velmat_system* sys, int* passed_out, char** report_out);

/* ---- expressions ---- */
VELMAT_API velmat_status velmat_expr_eval(const char* expr, const double* x, size_t n, double* value_out);

#ifdef __cplusplus
}
#endif

#endif
