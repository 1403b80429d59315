#ifndef BRIDGE_INSPECT_H
#define BRIDGE_INSPECT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BiPlanner {
  BI_PLANNER_GATSBI = 0,
  BI_PLANNER_FRONTIER = 1,
} BiPlanner;

typedef enum BiStatus {
  BI_STATUS_OK = 0,
  BI_STATUS_NULL_POINTER = 1,
  BI_STATUS_INVALID_UTF8 = 2,
  /**
   * Scenario or instance text was rejected.
   */
  BI_STATUS_PARSE_ERROR = 3,
  BI_STATUS_MISSION_FAILED = 4,
  BI_STATUS_INVALID_ARGUMENT = 5,
  /**
   * The caller's buffer is too small; the required size was written.
   */
  BI_STATUS_BUFFER_TOO_SMALL = 6,
  BI_STATUS_SOLVER_ERROR = 7,
  BI_STATUS_PANIC = 8,
} BiStatus;

typedef struct BiGtspInstance BiGtspInstance;

/**
 * The record of a finished mission.
 */
typedef struct BiMissionLog BiMissionLog;

/**
 * A loaded world with its mission parameters.
 */
typedef struct BiScenario BiScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty after a success. Valid until the
 * next call on the same thread.
 */
const char *bi_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *bi_version(void);

/**
 * Parses a scenario from TOML text.
 *
 * # Safety
 * `toml` must be a nul-terminated string and `out_scenario` a valid pointer.
 */
enum BiStatus bi_scenario_load(const char *toml, struct BiScenario **out_scenario);

/**
 * Loads one of the bundled scenarios by name.
 *
 * # Safety
 * `name` must be a nul-terminated string and `out_scenario` a valid pointer.
 */
enum BiStatus bi_scenario_load_bundled(const char *name, struct BiScenario **out_scenario);

/**
 * # Safety
 * `scenario` must be a handle from this library or null.
 */
enum BiStatus bi_scenario_set_seed(struct BiScenario *scenario, uint64_t seed);

/**
 * Number of bridge voxels that can be inspected at all.
 *
 * # Safety
 * `scenario` must be a valid handle and `out_count` a valid pointer.
 */
enum BiStatus bi_scenario_inspectable_count(const struct BiScenario *scenario, size_t *out_count);

/**
 * # Safety
 * `scenario` must come from this library and not be used afterwards. Null is ignored.
 */
void bi_scenario_free(struct BiScenario *scenario);

/**
 * Runs a full mission with default options.
 *
 * # Safety
 * `scenario` must be a valid handle and `out_log` a valid pointer.
 */
enum BiStatus bi_run_mission(const struct BiScenario *scenario,
                             enum BiPlanner planner,
                             struct BiMissionLog **out_log);

/**
 * Final fraction of inspectable voxels inspected, in [0, 1].
 *
 * # Safety
 * `log` must be a valid handle and `out_pct` a valid pointer.
 */
enum BiStatus bi_log_final_pct(const struct BiMissionLog *log, double *out_pct);

/**
 * Number of timeline rows.
 *
 * # Safety
 * `log` must be a valid handle and `out_rows` a valid pointer.
 */
enum BiStatus bi_log_row_count(const struct BiMissionLog *log, size_t *out_rows);

/**
 * Writes the timeline CSV into `buf`. Call with a null `buf` to query the size.
 *
 * # Safety
 * `buf` must hold `cap` bytes (or be null); `out_needed` must be valid.
 */
enum BiStatus bi_log_timeline_csv(const struct BiMissionLog *log,
                                  char *buf,
                                  size_t cap,
                                  size_t *out_needed);

/**
 * Writes the timing CSV into `buf`, like [`bi_log_timeline_csv`].
 *
 * # Safety
 * As for [`bi_log_timeline_csv`].
 */
enum BiStatus bi_log_timing_csv(const struct BiMissionLog *log,
                                char *buf,
                                size_t cap,
                                size_t *out_needed);

/**
 * # Safety
 * `log` must come from this library and not be used afterwards. Null is ignored.
 */
void bi_log_free(struct BiMissionLog *log);

/**
 * Parses an instance in GTSPLIB text form.
 *
 * # Safety
 * `gtsplib` must be a nul-terminated string and `out_instance` a valid pointer.
 */
enum BiStatus bi_gtsp_parse(const char *gtsplib, struct BiGtspInstance **out_instance);

/**
 * # Safety
 * `instance` must be a valid handle and `out_vertices`, `out_clusters` valid pointers.
 */
enum BiStatus bi_gtsp_size(const struct BiGtspInstance *instance,
                           size_t *out_vertices,
                           size_t *out_clusters);

/**
 * Solves the instance heuristically. The tour starts with vertex 0 and visits one vertex
 * per cluster; `max_iterations` of 0 returns the construction only.
 *
 * # Safety
 * `instance` must be a valid handle; `out_vertices` must hold `cap` entries;
 * `out_cost` and `out_len` must be valid.
 */
enum BiStatus bi_gtsp_solve(const struct BiGtspInstance *instance,
                            uint64_t seed,
                            size_t max_iterations,
                            double *out_cost,
                            size_t *out_vertices,
                            size_t cap,
                            size_t *out_len);

/**
 * Exact optimum by enumeration; fails with `InvalidArgument` on instances too large.
 *
 * # Safety
 * As for [`bi_gtsp_solve`].
 */
enum BiStatus bi_gtsp_brute_force(const struct BiGtspInstance *instance,
                                  double *out_cost,
                                  size_t *out_vertices,
                                  size_t cap,
                                  size_t *out_len);

/**
 * # Safety
 * `instance` must come from this library and not be used afterwards. Null is ignored.
 */
void bi_gtsp_free(struct BiGtspInstance *instance);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRIDGE_INSPECT_H */
