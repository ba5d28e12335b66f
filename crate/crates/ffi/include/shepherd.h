#ifndef SHEPHERD_H
#define SHEPHERD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum ShepherdStatus {
  SHEPHERD_STATUS_OK = 0,
  SHEPHERD_STATUS_NULL_ARGUMENT = 1,
  SHEPHERD_STATUS_INVALID_UTF8 = 2,
  SHEPHERD_STATUS_PARSE_ERROR = 3,
  SHEPHERD_STATUS_INVALID_CONFIG = 4,
  SHEPHERD_STATUS_INVALID_ARGUMENT = 5,
  SHEPHERD_STATUS_PANIC = 6,
} ShepherdStatus;

// Terminal set an evolved program reads.
typedef enum ShepherdTerminals {
  // dog-x dog-y sheep-x sheep-y
  SHEPHERD_TERMINALS_SINGLE4 = 0,
  // dog, two other dogs, nearest sheep, flock mean, steering point (x, y each)
  SHEPHERD_TERMINALS_MULTI12 = 1,
} ShepherdTerminals;

// Simulation and GP settings, edited with [`shepherd_config_set`].
typedef struct ShepherdConfig ShepherdConfig;

// An evolved program or one of the built-in baselines.
typedef struct ShepherdController ShepherdController;

// Aggregate of a multi-trial evaluation.
typedef struct ShepherdTrialSummary {
  uint64_t n_trials;
  double mean;
  double std_error;
} ShepherdTrialSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *shepherd_last_error(void);

// Library version as a static NUL-terminated string.
const char *shepherd_version(void);

// New configuration holding the default parameters.
struct ShepherdConfig *shepherd_config_new(void);

// # Safety
// `cfg` must come from [`shepherd_config_new`] and not be used afterwards.
void shepherd_config_free(struct ShepherdConfig *cfg);

// Sets one field by its configuration-file name, e.g. `"n_sheep"`, `"5"`.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
enum ShepherdStatus shepherd_config_set(struct ShepherdConfig *cfg,
                                        const char *key,
                                        const char *value);

// Checks the configuration as a whole (ranges, pen smaller than field, ...).
//
// # Safety
// `cfg` must be a live handle.
enum ShepherdStatus shepherd_config_validate(const struct ShepherdConfig *cfg);

// The handcrafted baseline dog.
//
// # Safety
// `out` must be writable.
enum ShepherdStatus shepherd_controller_simple(struct ShepherdController **out);

// The random-force baseline dog.
//
// # Safety
// `out` must be writable.
enum ShepherdStatus shepherd_controller_random(struct ShepherdController **out);

// Parses an s-expression program such as `"(pair (- sheep-x dog-x) 0)"`.
//
// # Safety
// `text` must be NUL-terminated; `out` writable.
enum ShepherdStatus shepherd_controller_parse(const char *text,
                                              enum ShepherdTerminals terminals,
                                              uint32_t d_max,
                                              struct ShepherdController **out);

// # Safety
// `ctrl` must come from a `shepherd_controller_*` constructor and not be
// used afterwards.
void shepherd_controller_free(struct ShepherdController *ctrl);

// Evaluates an evolved program on a terminal vector, writing the force.
// Fails with `INVALID_ARGUMENT` for baselines or a wrong-length vector.
//
// # Safety
// `params` must point to `len` doubles; `out_x`/`out_y` must be writable.
enum ShepherdStatus shepherd_controller_eval(const struct ShepherdController *ctrl,
                                             const double *params,
                                             size_t len,
                                             double *out_x,
                                             double *out_y);

// Runs one seeded episode and reports the captured sheep.
//
// # Safety
// Handles must be live; output pointers writable (either may be null to skip).
enum ShepherdStatus shepherd_run_episode(const struct ShepherdController *ctrl,
                                         const struct ShepherdConfig *cfg,
                                         uint64_t seed,
                                         uint64_t *out_captured,
                                         double *out_fraction);

// Runs `n_trials` seeded episodes (trial seeds derived from `seed`).
//
// # Safety
// Handles must be live; `out` writable.
enum ShepherdStatus shepherd_evaluate_trials(const struct ShepherdController *ctrl,
                                             const struct ShepherdConfig *cfg,
                                             uint64_t n_trials,
                                             uint64_t seed,
                                             struct ShepherdTrialSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHEPHERD_H */
