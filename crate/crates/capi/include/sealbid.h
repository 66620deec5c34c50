/* C interface to the sealbid auction simulator. */

#ifndef SEALBID_H
#define SEALBID_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SbStatus {
  SbOk = 0,
  SbErrNullPointer = 1,
  SbErrUtf8 = 2,
  SbErrParse = 3,
  SbErrRun = 4,
  SbErrTooLarge = 5,
  SbErrPanic = 6,
} SbStatus;

/**
 * Opaque report handle.
 */
typedef struct SbReport SbReport;

/**
 * Opaque scenario handle.
 */
typedef struct SbScenario SbScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread. Never null; empty when
 * no error occurred. Valid until the next failing call on this thread.
 */
const char *sb_last_error(void);

/**
 * Parses a scenario document (TOML). On success the handle must be
 * released with [`sb_scenario_free`].
 *
 * # Safety
 * `toml_text` must point to a NUL-terminated string and `out` to writable
 * pointer storage.
 */
enum SbStatus sb_scenario_parse(const char *toml_text, struct SbScenario **out);

/**
 * Generates a storage-market scenario with default price parameters.
 *
 * # Safety
 * `out` must point to writable pointer storage.
 */
enum SbStatus sb_scenario_generate(uint64_t seed,
                                   uint32_t items,
                                   uint32_t bidders,
                                   struct SbScenario **out);

/**
 * Serializes a scenario back to TOML.
 *
 * # Safety
 * `scenario` must be a live handle from this library; `out` writable.
 */
enum SbStatus sb_scenario_to_toml(const struct SbScenario *scenario, char **out);

/**
 * Runs a scenario end to end. On success the report handle must be
 * released with [`sb_report_free`].
 *
 * # Safety
 * `scenario` must be a live handle from this library; `out` writable.
 */
enum SbStatus sb_scenario_run(const struct SbScenario *scenario, struct SbReport **out);

/**
 * Serializes a report to JSON.
 *
 * # Safety
 * `report` must be a live handle from this library; `out` writable.
 */
enum SbStatus sb_report_to_json(const struct SbReport *report, char **out);

/**
 * Renders the human-readable report; timings included when
 * `include_timings` is nonzero.
 *
 * # Safety
 * `report` must be a live handle from this library; `out` writable.
 */
enum SbStatus sb_report_render(const struct SbReport *report, bool include_timings, char **out);

/**
 * Runs the descending-price solver on a raw instance. `assignment_out`
 * receives `bidders` entries (0 = unassigned), `prices_out` receives
 * `items + 1` entries (index 0 is the null item).
 *
 * # Safety
 * `valuations` must hold `bidders * (items + 1)` values, `reservations`
 * `items` values; the output buffers must be writable at the sizes above.
 */
enum SbStatus sb_solve(const uint64_t *valuations,
                       uint32_t bidders,
                       const uint64_t *reservations,
                       uint32_t items,
                       uint32_t *assignment_out,
                       uint64_t *prices_out,
                       int64_t *score_out);

/**
 * Audits a solution against a raw instance. Writes a JSON misbehaviour
 * proof to `proof_json_out`, or null when the solution is sound;
 * `is_buyer_optimal_out` additionally reports whether it is the
 * buyer-optimal equilibrium.
 *
 * # Safety
 * Array arguments as in [`sb_solve`]; `assignment` holds `bidders` values
 * and `prices` holds `items + 1` values; outputs must be writable.
 */
enum SbStatus sb_audit(const uint64_t *valuations,
                       uint32_t bidders,
                       const uint64_t *reservations,
                       uint32_t items,
                       const uint32_t *assignment,
                       const uint64_t *prices,
                       int64_t score,
                       char **proof_json_out,
                       bool *is_buyer_optimal_out);

/**
 * Releases a scenario handle.
 *
 * # Safety
 * `scenario` must be null or a handle produced by this library, not yet
 * freed.
 */
void sb_scenario_free(struct SbScenario *scenario);

/**
 * Releases a report handle.
 *
 * # Safety
 * `report` must be null or a handle produced by this library, not yet
 * freed.
 */
void sb_report_free(struct SbReport *report);

/**
 * Releases a string produced by this library.
 *
 * # Safety
 * `s` must be null or a string produced by this library, not yet freed.
 */
void sb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEALBID_H */
