#ifndef LOADSHIFT_H
#define LOADSHIFT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Slots per day, for sizing schedule buffers.
#define LS_SLOTS 24

typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_UTF8 = 2,
  LS_STATUS_PARSE = 3,
  LS_STATUS_INVALID_SCENARIO = 4,
  LS_STATUS_DIMENSION = 5,
  LS_STATUS_UNDEFINED_PAR = 6,
  LS_STATUS_SEARCH_SPACE_TOO_LARGE = 7,
  LS_STATUS_IO = 8,
  LS_STATUS_INVALID_ARGUMENT = 9,
  LS_STATUS_PANIC = 10,
} LsStatus;

// Opaque result of a GA run.
typedef struct LsGaRun LsGaRun;

// Opaque validated scenario.
typedef struct LsScenario LsScenario;

// Evaluation of one schedule.
typedef struct LsMetrics {
  // Total energy consumed, kWh.
  double energy_kwh;
  // Bill with no local generation.
  double cost;
  // Bill for the grid share after PV dispatch; equals `cost` without PV.
  double grid_cost;
  // Peak grid draw in any slot, kWh.
  double peak_kwh;
  // Peak-to-average ratio of the grid draw; 0 when the grid supplies nothing.
  double par;
  // GA fitness: grid cost plus demand-limit penalty.
  double fitness;
} LsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or NULL. The pointer
// stays valid until the next `ls_*` call on the same thread.
const char *ls_last_error(void);

// Parses and validates a scenario JSON document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum LsStatus ls_scenario_from_json(const char *json, struct LsScenario **out);

// The bundled six-appliance reference household.
//
// # Safety
// `out` must be a writable pointer.
enum LsStatus ls_scenario_reference(struct LsScenario **out);

// # Safety
// `scenario` must come from this library and not be used afterwards.
void ls_scenario_free(struct LsScenario *scenario);

// Number of appliance rows; schedule buffers hold this many × 24 bytes.
//
// # Safety
// `scenario` must be a live handle or NULL (returns 0).
size_t ls_scenario_appliance_count(const struct LsScenario *scenario);

// Replaces the GA seed.
//
// # Safety
// `scenario` must be a live handle.
enum LsStatus ls_scenario_set_seed(struct LsScenario *scenario, uint64_t seed);

// Evaluates a schedule against the scenario.
//
// # Safety
// `bits` must point to `len` readable bytes, `out` must be writable.
enum LsStatus ls_evaluate(const struct LsScenario *scenario,
                          const uint8_t *bits,
                          size_t len,
                          struct LsMetrics *out);

// Repairs a schedule in place so only demand-limit violations remain.
// Empty CL rows are placed using a generator seeded with `seed`.
//
// # Safety
// `bits` must point to `len` writable bytes.
enum LsStatus ls_repair(const struct LsScenario *scenario,
                        uint8_t *bits,
                        size_t len,
                        uint64_t seed);

// Number of structural violations (all kinds) of a schedule.
//
// # Safety
// `bits` must point to `len` readable bytes, `out` must be writable.
enum LsStatus ls_violation_count(const struct LsScenario *scenario,
                                 const uint8_t *bits,
                                 size_t len,
                                 size_t *out);

// Runs the genetic algorithm with the scenario's settings.
//
// # Safety
// `out` must be writable.
enum LsStatus ls_evolve(const struct LsScenario *scenario, struct LsGaRun **out);

// # Safety
// `run` must come from [`ls_evolve`] and not be used afterwards.
void ls_ga_run_free(struct LsGaRun *run);

// # Safety
// `run` must be a live handle or NULL (returns NaN).
double ls_ga_run_best_fitness(const struct LsGaRun *run);

// # Safety
// `run` must be a live handle or NULL (returns 0).
size_t ls_ga_run_generations(const struct LsGaRun *run);

// 1 when the run stopped on stagnation, 0 when it used every generation.
//
// # Safety
// `run` must be a live handle or NULL (returns 0).
int32_t ls_ga_run_stagnated(const struct LsGaRun *run);

// Copies the best schedule into `out`.
//
// # Safety
// `out` must point to `len` writable bytes.
enum LsStatus ls_ga_run_schedule(const struct LsGaRun *run, uint8_t *out, size_t len);

// Exhaustive optimum; refuses with `SearchSpaceTooLarge` above `cap`.
//
// # Safety
// `out_bits` must point to `len` writable bytes and `out_cost` be writable.
enum LsStatus ls_brute_force(const struct LsScenario *scenario,
                             uint64_t cap,
                             uint8_t *out_bits,
                             size_t len,
                             double *out_cost);

// PV generation for `slot` under a Gaussian profile.
//
// # Safety
// `out` must be writable.
enum LsStatus ls_pv_generation(double sigma,
                               double delta,
                               double scale,
                               uint32_t day_start,
                               uint32_t day_end,
                               uint32_t slot,
                               double *out);

// Runs the baseline-versus-GA comparison and returns the summary as a JSON
// string to be released with [`ls_string_free`].
//
// # Safety
// `out_json` must be writable.
enum LsStatus ls_compare(const struct LsScenario *scenario, bool no_pv, char **out_json);

// # Safety
// `s` must come from this library and not be used afterwards.
void ls_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOADSHIFT_H */
