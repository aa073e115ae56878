#ifndef STOCHCTM_H
#define STOCHCTM_H

/* C interface to the stochastic cell-transmission toolkit.
 *
 * Every call returns a status code. On failure a thread-local message is
 * available from stochctm_last_error(). Strings handed out through a char**
 * belong to the caller and are released with stochctm_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define STOCHCTM_API __declspec(dllexport)
#else
#define STOCHCTM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct stochctm_scenario stochctm_scenario;

typedef enum {
  STOCHCTM_OK = 0,
  STOCHCTM_E_ARGUMENT = 1,
  STOCHCTM_E_SCHEMA = 2,
  STOCHCTM_E_MODEL = 3,
  STOCHCTM_E_NUMERICAL = 4,
  STOCHCTM_E_IO = 5,
  STOCHCTM_E_NOT_APPLICABLE = 6,
  STOCHCTM_E_INTERNAL = 7
} stochctm_status;

STOCHCTM_API const char* stochctm_version(void);
STOCHCTM_API const char* stochctm_status_name(stochctm_status status);
/* Message of the last failed call on this thread ("" if none). */
STOCHCTM_API const char* stochctm_last_error(void);
STOCHCTM_API void stochctm_string_free(char* text);

STOCHCTM_API stochctm_status stochctm_scenario_load_file(const char* path, stochctm_scenario** out);
STOCHCTM_API stochctm_status stochctm_scenario_load_json(const char* json, stochctm_scenario** out);
STOCHCTM_API void stochctm_scenario_free(stochctm_scenario* scenario);
STOCHCTM_API size_t stochctm_scenario_cells(const stochctm_scenario* scenario);

/* In the calls below config_json is {"v": [...], "w": [...]}; NULL selects the
 * scenario's own config (E_ARGUMENT if it has none). a_kind is "uniform",
 * "weighted" (or "position_weighted") or "hotspot"; NULL means "uniform". */

/* JSON summary of a loaded scenario, with the config report when given. */
STOCHCTM_API stochctm_status stochctm_validate(const stochctm_scenario* scenario,
                                               const char* config_json, char** out_json);

/* Trajectory CSV from an empty highway in mode 0. dt <= 0 selects the default. */
STOCHCTM_API stochctm_status stochctm_simulate(const stochctm_scenario* scenario,
                                               const char* config_json, double horizon,
                                               double dt, uint64_t seed, char** out_csv);

STOCHCTM_API stochctm_status stochctm_certify(const stochctm_scenario* scenario,
                                              const char* config_json, const char* a_kind,
                                              double gamma, char** out_json);

STOCHCTM_API stochctm_status stochctm_optimize(const stochctm_scenario* scenario,
                                               const char* a_kind, double gamma,
                                               char** out_json);

/* Metering plan for a stationary hotspot. With finite demand the greedy plan is
 * returned; two-cell scenarios with infinite demand also report the optimal sets. */
STOCHCTM_API stochctm_status stochctm_hotspot(const stochctm_scenario* scenario, char** out_json);

/* grid is "v1=lo:hi:n[,v2=lo:hi:n]"; patterns is a comma-separated list such as
 * "10,11" or NULL for every pattern. */
STOCHCTM_API stochctm_status stochctm_sweep(const stochctm_scenario* scenario, const char* grid,
                                            const char* patterns, const char* a_kind,
                                            double gamma, char** out_csv);

STOCHCTM_API stochctm_status stochctm_montecarlo(const stochctm_scenario* scenario,
                                                 const char* config_json, size_t runs,
                                                 double horizon, uint64_t seed, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
