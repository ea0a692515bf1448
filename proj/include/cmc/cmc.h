#ifndef CMC_H
#define CMC_H

/* C interface of the cavity-mirror-cavity simulator.
 *
 * Every call returns a cmc_status. On failure the message is available from
 * cmc_last_error() on the calling thread until the next failing call.
 * Strings handed out by the library are released with cmc_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CMC_BUILDING_LIBRARY)
#    define CMC_API __declspec(dllexport)
#  else
#    define CMC_API __declspec(dllimport)
#  endif
#else
#  define CMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cmc_status {
  CMC_OK = 0,
  CMC_E_INVALID_ARGUMENT = 1,
  CMC_E_INVALID_TRUNCATION = 2,
  CMC_E_DIMENSION_MISMATCH = 3,
  CMC_E_SINGULAR_GENERATOR = 4,
  CMC_E_NOT_HERMITIAN = 5,
  CMC_E_NOT_NORMALIZED = 6,
  CMC_E_INTEGRATOR = 7,
  CMC_E_JUMP_FAILURE = 8,
  CMC_E_NO_RESONANCE = 9,
  CMC_E_NON_UNIMODAL = 10,
  CMC_E_CONFIG = 11,
  CMC_E_IO = 12,
  CMC_E_INTERNAL = 99
} cmc_status;

typedef struct cmc_config cmc_config;
typedef struct cmc_system cmc_system;

typedef struct cmc_params {
  double omega_a, omega_b, omega_c;
  double g;
  double gamma_a, gamma_b, gamma_c;
} cmc_params;

typedef struct cmc_resonance {
  double analytic_value;
  double optimized_value;
  double analytic_objective;
  double optimized_objective;
  double search_width;
  size_t evaluations;
} cmc_resonance;

typedef void (*cmc_log_fn)(const char* message, void* user);

CMC_API const char* cmc_version(void);
CMC_API const char* cmc_last_error(void);
CMC_API const char* cmc_status_name(cmc_status status);
CMC_API void cmc_string_free(char* s);

/* Presets: newline-separated names, and the JSON of one preset. */
CMC_API cmc_status cmc_preset_names(char** out);
CMC_API cmc_status cmc_preset_json(const char* scenario, char** out);

CMC_API cmc_status cmc_config_from_preset(const char* scenario, cmc_config** out);
CMC_API cmc_status cmc_config_from_json(const char* document, cmc_config** out);
CMC_API cmc_status cmc_config_from_file(const char* path, cmc_config** out);
/* "dotted.key=value"; the value is parsed as JSON, falling back to a string. */
CMC_API cmc_status cmc_config_override(cmc_config* cfg, const char* key_value);
/* Applies several overrides at once; unknown keys are reported together. */
CMC_API cmc_status cmc_config_override_all(cmc_config* cfg, const char* const* items, size_t count);
CMC_API cmc_status cmc_config_to_json(const cmc_config* cfg, char** out);
CMC_API cmc_status cmc_config_scenario(const cmc_config* cfg, char** out);
CMC_API void cmc_config_free(cmc_config* cfg);

/* Runs every output enabled in the config. *sw_passed (optional) is set to 0
 * when a gated SW verification row failed. Warnings go through `log`. */
CMC_API cmc_status cmc_run(const cmc_config* cfg, const char* out_dir, cmc_log_fn log, void* user, int* sw_passed);

/* sw_verification.csv text for the resolved config. */
CMC_API cmc_status cmc_verify_sw(const cmc_config* cfg, char** out_csv, int* all_passed);

/* objective: "gap", "amplitude" or NULL for the config's; width <= 0 keeps the
 * config's (default 40 g^3 / omega_b^2). */
CMC_API cmc_status cmc_tune_resonance(const cmc_config* cfg, const char* objective, double width, cmc_resonance* out);

/* Low-level access to one parameter set. dims = {a, b, c}. */
CMC_API cmc_status cmc_system_create(const cmc_params* params, const int dims[3], cmc_system** out);
CMC_API void cmc_system_free(cmc_system* sys);
CMC_API cmc_status cmc_system_dimension(const cmc_system* sys, size_t* out);
/* Ascending dressed energies; `out` holds cmc_system_dimension values. */
CMC_API cmc_status cmc_system_eigenvalues(const cmc_system* sys, double* out);
/* Occupations on a uniform grid, row-major n_points x 3 (modes a, b, c). */
CMC_API cmc_status cmc_system_evolve_master(const cmc_system* sys, const int initial[3], double t_start, double t_end,
                                            size_t n_points, double* occupations);
CMC_API cmc_status cmc_system_evolve_trajectory(const cmc_system* sys, const int initial[3], double t_start,
                                                double t_end, size_t n_points, uint64_t seed, double* occupations,
                                                size_t* n_jumps);

#ifdef __cplusplus
}
#endif

#endif
