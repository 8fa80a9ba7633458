/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef FIBEROPT_H
#define FIBEROPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; the numeric values of the first five match the CLI exit
// codes.
typedef enum FoStatus {
  FO_STATUS_OK = 0,
  // A required pointer argument was null.
  FO_STATUS_NULL_ARGUMENT = 1,
  // Invalid configuration key, value or file syntax.
  FO_STATUS_VALIDATION = 2,
  // Numerical failure: singular tensor, failed factorization, degenerate
  // fractions.
  FO_STATUS_SOLVER = 3,
  // The run hit its iteration limit. The run handle is still produced.
  FO_STATUS_NON_CONVERGENCE = 4,
  FO_STATUS_IO = 5,
  // Bad non-pointer argument: invalid UTF-8, index out of range, short
  // output buffer.
  FO_STATUS_INVALID_ARGUMENT = 6,
  // A Rust panic was caught at the boundary.
  FO_STATUS_PANIC = 7,
} FoStatus;

// Optimization settings.
typedef struct FoConfig FoConfig;

// A finished optimization with its final design.
typedef struct FoRun FoRun;

// One row of the optimization history.
typedef struct FoStepRecord {
  size_t step;
  double compliance;
  double weight_violation;
  double lambda;
  double integral;
  double lagrangian;
  double max_dphi;
  double wall_ms;
} FoStepRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *fo_version(void);

// Copies the calling thread's last error message into `buf` (truncated to
// `cap − 1` bytes, NUL-terminated) and returns its full length. Pass a null
// buffer to query the length. The message is empty after a successful
// call.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t fo_last_error_message(char *buf, size_t cap);

// New configuration holding the defaults. Release with [`fo_config_free`].
struct FoConfig *fo_config_new(void);

// Loads and validates a configuration file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum FoStatus fo_config_load(const char *path, struct FoConfig **out);

// Sets one key using the config-file syntax for its value. The whole
// configuration is revalidated; on failure it is left unchanged.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
enum FoStatus fo_config_set(struct FoConfig *cfg, const char *key, const char *value);

// Writes the effective configuration in loadable text form; see
// [`fo_last_error_message`] for the buffer convention. Returns 0 for a null
// handle.
//
// # Safety
// `cfg` must be null or a live handle; `buf` null or `cap` writable bytes.
size_t fo_config_echo(const struct FoConfig *cfg, char *buf, size_t cap);

// # Safety
// `cfg` must be null or a handle from this library not yet freed.
void fo_config_free(struct FoConfig *cfg);

// Runs the optimization described by `cfg` from its initial design.
//
// On `Ok` and `NonConvergence` `*out` receives a run handle to release
// with [`fo_run_free`]; on any other status it is set to null.
//
// # Safety
// `cfg` must be a live handle; `out` must be writable.
enum FoStatus fo_run(const struct FoConfig *cfg, struct FoRun **out);

// Whether the run met the convergence criteria; false for a null handle.
//
// # Safety
// `run` must be null or a live handle.
bool fo_run_converged(const struct FoRun *run);

// Number of history rows (iterations including step 0); 0 for a null
// handle.
//
// # Safety
// `run` must be null or a live handle.
size_t fo_run_step_count(const struct FoRun *run);

// Copies history row `index` into `out`.
//
// # Safety
// `run` must be a live handle; `out` must be writable.
enum FoStatus fo_run_step(const struct FoRun *run, size_t index, struct FoStepRecord *out);

// Number of mesh elements; 0 for a null handle.
//
// # Safety
// `run` must be null or a live handle.
size_t fo_run_element_count(const struct FoRun *run);

// Final smoothed phase fractions, three values (void, isotropic, fiber)
// per element; `len` must be at least `3 × element count`.
//
// # Safety
// `run` must be a live handle; `out` must point to `len` writable doubles.
enum FoStatus fo_run_fractions(const struct FoRun *run, double *out, size_t len);

// Final fiber angles in radians, one per element, in `[0, π)`.
//
// # Safety
// `run` must be a live handle; `out` must point to `len` writable doubles.
enum FoStatus fo_run_angles(const struct FoRun *run, double *out, size_t len);

// Writes `config.echo`, `history.csv` and the final snapshot
// (`final.vtk`) into `dir`, creating it if needed.
//
// # Safety
// `run` must be a live handle; `dir` a NUL-terminated string.
enum FoStatus fo_run_write(const struct FoRun *run, const char *dir);

// # Safety
// `run` must be null or a handle from this library not yet freed.
void fo_run_free(struct FoRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIBEROPT_H */
