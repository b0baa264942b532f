#pragma once

/* C interface to the task-frame grounding toolkit.
 *
 * All functions return tff_status; TFF_OK means success. String outputs are
 * heap-allocated UTF-8, owned by the caller, released with tff_string_free.
 * Structured inputs and outputs are JSON text. On failure the handle stores a
 * message retrievable with tff_last_error until the next call on that handle.
 */

#include <stddef.h>

#ifdef __cplusplus
#  define TFF_EXTERN_C extern "C"
#else
#  define TFF_EXTERN_C
#endif

#ifdef _WIN32
#  ifdef TFF_BUILD_DLL
#    define TFF_API TFF_EXTERN_C __declspec(dllexport)
#  else
#    define TFF_API TFF_EXTERN_C __declspec(dllimport)
#  endif
#else
#  define TFF_API TFF_EXTERN_C __attribute__((visibility("default")))
#endif

typedef enum tff_status {
  TFF_OK = 0,
  TFF_EMPTY_NAME = 1,
  TFF_INVALID_SPEC = 2,
  TFF_SHOT_COUNT_OUT_OF_RANGE = 3,
  TFF_UNKNOWN_UNIT = 4,
  TFF_RULE_NOT_FOUND = 5,
  TFF_RULE_FILE_INVALID = 6,
  TFF_ALIAS_CYCLE = 7,
  TFF_NETWORK_ERROR = 8,
  TFF_AUTH_ERROR = 9,
  TFF_RATE_LIMITED = 10,
  TFF_FIXTURE_MISS = 11,
  TFF_UNSTABLE_SIMULATION = 12,
  TFF_TRACE_TOO_SHORT = 13,
  TFF_SAFETY_VIOLATION = 14,
  TFF_IO_ERROR = 15,
  TFF_SCHEMA_MISMATCH = 16,
  TFF_INVALID_ARGUMENT = 17,
  TFF_INTERNAL = 18
} tff_status;

/* Opaque toolkit handle. Not thread-safe; use one handle per thread. */
typedef struct tff_ctx tff_ctx;

/* config_json may be NULL or "{}" for defaults. Recognized keys:
 *   "library_path"   path to a source-function library JSON file
 *   "rules_path"     path to a metric-rules JSON file
 *   "envelope"       {"max_force_n", "max_torque_nm",
 *                     "max_angular_rate_rad_s", "max_linear_rate_cm_s"}
 *   "gains"          {"force_kp", "force_ki", "velocity_kp",
 *                     "position_kp", "position_kd"}
 *   "endpoints"      {"<model id>": "<url>"} endpoint overrides
 *   "max_attempts", "backoff_base_seconds", "max_concurrent_requests"
 */
TFF_API tff_status tff_ctx_create(const char* config_json, tff_ctx** out_ctx);
TFF_API void tff_ctx_destroy(tff_ctx* ctx);

/* Message from the most recent failing call on this handle, empty if none.
 * The pointer stays valid until the next call that takes the handle. */
TFF_API const char* tff_last_error(const tff_ctx* ctx);
TFF_API const char* tff_status_name(tff_status status);
TFF_API void tff_string_free(char* text);

/* Canonical snake_case task name, e.g. "Open the Door" -> "open_door". */
TFF_API tff_status tff_normalize_task_name(tff_ctx* ctx, const char* raw,
                                           char** out_name);

/* Unit classification: writes the control mode implied by a unit token on an
 * axis ("tx".."rz"), one of "force" or "position_velocity". */
TFF_API tff_status tff_classify_unit(tff_ctx* ctx, const char* unit_token,
                                     const char* axis, char** out_mode);

/* Yes/no question asking whether a task is primitive. */
TFF_API tff_status tff_build_primitiveness_prompt(tff_ctx* ctx,
                                                  const char* task,
                                                  char** out_prompt);

/* 1 = yes, 0 = no, -1 = ambiguous. */
TFF_API tff_status tff_interpret_primitiveness_reply(tff_ctx* ctx,
                                                     const char* reply,
                                                     int* out_answer);

/* Few-shot code-generation prompt: `shots` source functions from the
 * configured library followed by a target stub for `task`. */
TFF_API tff_status tff_build_nshot_prompt(tff_ctx* ctx, const char* task,
                                          int shots, char** out_prompt);

/* Python-style rendering of a spec. source_index >= 1 renders a full source
 * function with that label; 0 renders the bare target stub. */
TFF_API tff_status tff_render_function(tff_ctx* ctx, const char* spec_json,
                                       int source_index, char** out_text);

/* Parse a model completion into a parse-outcome JSON document with fields
 * "status" ("ok"/"rejected"), "spec"/"reason", "warnings". Never fails on
 * malformed completions; those come back with status "rejected". */
TFF_API tff_status tff_parse_generation(tff_ctx* ctx, const char* completion,
                                        const char* task,
                                        char** out_outcome_json);

/* Judge a spec against the metric rule for catalog task `task_no` (1-30).
 * context_json maps task numbers to previously accepted spec JSON records,
 * e.g. {"4": {...}}; pass NULL or "{}" when no context exists. Output is a
 * verdict JSON document with "correct", "failed_predicates",
 * "safety_violations" and "notes". */
TFF_API tff_status tff_validate_spec(tff_ctx* ctx, const char* spec_json,
                                     int task_no, const char* context_json,
                                     char** out_verdict_json);

/* Safety screen only: JSON array of envelope violations, [] when clean. */
TFF_API tff_status tff_safety_check(tff_ctx* ctx, const char* spec_json,
                                    char** out_violations_json);

/* One completion round-trip. backend is "live", "record" or "replay";
 * fixtures_path may be NULL for live. */
TFF_API tff_status tff_complete(tff_ctx* ctx, const char* prompt,
                                const char* model, const char* backend,
                                const char* fixtures_path,
                                char** out_completion);

/* Full pipeline for one task: optional primitiveness gate, prompt build,
 * completion, parse, safety screen. Output JSON bundles the prompt,
 * completion, parse outcome and safety findings. */
TFF_API tff_status tff_ground_task(tff_ctx* ctx, const char* task, int shots,
                                   const char* model, const char* backend,
                                   const char* fixtures_path,
                                   int check_primitive, char** out_json);

/* Run the 30-task benchmark. Persists the run to out_path when non-NULL and
 * writes a summary JSON document with per-task correctness. */
TFF_API tff_status tff_run_eval(tff_ctx* ctx, const char* model, int shots,
                                const char* backend, const char* fixtures_path,
                                const char* out_path, char** out_summary_json);

/* Render persisted runs as a report. style is "rates", "dots" or "json". */
TFF_API tff_status tff_render_report(tff_ctx* ctx,
                                     const char* const* run_paths,
                                     size_t run_count, const char* style,
                                     char** out_text);

/* Per-axis controller selection implied by a spec, as JSON. */
TFF_API tff_status tff_spec_to_selection(tff_ctx* ctx, const char* spec_json,
                                         char** out_selection_json);

/* Simulate a spec against an environment model. Refuses set-points outside
 * the safety envelope unless allow_unsafe is nonzero. env_json may be NULL
 * for free space. Writes the full trace as CSV when trace_csv_path is
 * non-NULL; the summary JSON reports final state and steady-state error. */
TFF_API tff_status tff_simulate(tff_ctx* ctx, const char* spec_json,
                                const char* env_json, double duration,
                                double dt, int allow_unsafe,
                                const char* trace_csv_path,
                                char** out_summary_json);
