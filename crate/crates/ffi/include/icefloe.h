#ifndef ICEFLOE_H
#define ICEFLOE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Values per row written by [`icefloe_converge`]: dx, three errors and
 * three rates.
 */
#define ICEFLOE_CONVERGENCE_COLUMNS 7

/**
 * Result codes shared by all entry points.
 */
typedef enum IcefloeStatus {
  ICEFLOE_STATUS_OK = 0,
  ICEFLOE_STATUS_NULL_POINTER = 1,
  ICEFLOE_STATUS_INVALID_UTF8 = 2,
  ICEFLOE_STATUS_CONFIG = 3,
  ICEFLOE_STATUS_INVALID_SPEC = 4,
  ICEFLOE_STATUS_NON_FINITE = 5,
  ICEFLOE_STATUS_NON_CONVERGENCE = 6,
  ICEFLOE_STATUS_IO = 7,
  ICEFLOE_STATUS_BUFFER_TOO_SMALL = 8,
  ICEFLOE_STATUS_NUMERICAL = 9,
  ICEFLOE_STATUS_PANIC = 10,
} IcefloeStatus;

/**
 * Field selector for [`icefloe_sim_copy_field`].
 */
typedef enum IcefloeField {
  ICEFLOE_FIELD_VELOCITY = 0,
  ICEFLOE_FIELD_THICKNESS = 1,
  ICEFLOE_FIELD_CONCENTRATION = 2,
} IcefloeField;

/**
 * A simulation that is advanced one step at a time.
 */
typedef struct IcefloeSim IcefloeSim;

/**
 * Parsed run configuration.
 */
typedef struct IcefloeSpec IcefloeSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next call into the library from the same thread.
 */
const char *icefloe_last_error(void);

/**
 * Parses a configuration file's text into a new spec handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IcefloeStatus icefloe_spec_from_config(const char *text, struct IcefloeSpec **out);

/**
 * Overrides one configuration key. The spec is left unchanged on failure.
 *
 * # Safety
 * `spec` must come from [`icefloe_spec_from_config`]; `key` and `value`
 * must be NUL-terminated strings.
 */
enum IcefloeStatus icefloe_spec_set(struct IcefloeSpec *spec, const char *key, const char *value);

/**
 * Number of cells of the configured grid.
 *
 * # Safety
 * `spec` must be null or a live spec handle.
 */
size_t icefloe_spec_cells(const struct IcefloeSpec *spec);

/**
 * # Safety
 * `spec` must be null or a handle not yet freed.
 */
void icefloe_spec_free(struct IcefloeSpec *spec);

/**
 * Runs the spec to completion and writes all artefacts under `out_dir`.
 * `exit_code` receives the same value the command-line tool would exit
 * with. A blow-up is a normal outcome here: the status is `Ok` and the
 * exit code says what happened.
 *
 * # Safety
 * `spec` must be a live handle, `out_dir` a NUL-terminated path and
 * `exit_code` null or writable.
 */
enum IcefloeStatus icefloe_run(const struct IcefloeSpec *spec,
                               const char *out_dir,
                               int32_t *exit_code);

/**
 * Builds a simulation at the initial state of `spec`.
 *
 * # Safety
 * `spec` must be a live handle and `out` a valid pointer.
 */
enum IcefloeStatus icefloe_sim_new(const struct IcefloeSpec *spec, struct IcefloeSim **out);

/**
 * Advances by one time step.
 *
 * # Safety
 * `sim` must be a live simulation handle.
 */
enum IcefloeStatus icefloe_sim_step(struct IcefloeSim *sim);

/**
 * Model time in seconds, or NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live simulation handle.
 */
double icefloe_sim_time(const struct IcefloeSim *sim);

/**
 * Number of values in one field. Velocity has one more slot than the
 * number of cells on the staggered grid.
 *
 * # Safety
 * `sim` must be null or a live simulation handle.
 */
size_t icefloe_sim_field_len(const struct IcefloeSim *sim, enum IcefloeField field);

/**
 * Copies a field into `buf`, which must hold at least
 * [`icefloe_sim_field_len`] values.
 *
 * # Safety
 * `sim` must be a live handle and `buf` valid for `len` writes.
 */
enum IcefloeStatus icefloe_sim_copy_field(const struct IcefloeSim *sim,
                                          enum IcefloeField field,
                                          double *buf,
                                          size_t len);

/**
 * # Safety
 * `sim` must be null or a handle not yet freed.
 */
void icefloe_sim_free(struct IcefloeSim *sim);

/**
 * Ice strength `P` in N/m with the default parameters.
 */
double icefloe_ice_strength(double h, double a);

/**
 * Internal stress in N/m for a strain rate and local state, with the
 * default parameters.
 */
double icefloe_stress(double du_dx, double h, double a);

/**
 * Runs the manufactured-solution refinement study at 50, 100 and 200
 * cells. `scheme` is `"cd"` or `"weno"`; a non-positive `horizon` keeps the
 * default of 5 s. Rows are written to `rows` in row-major order with NaN
 * for the rates of the coarsest level, and `n_rows` receives the row count.
 *
 * # Safety
 * `scheme` must be a NUL-terminated string, `rows` valid for `len` writes
 * and `n_rows` writable.
 */
enum IcefloeStatus icefloe_converge(const char *scheme,
                                    double horizon,
                                    double *rows,
                                    size_t len,
                                    size_t *n_rows);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ICEFLOE_H */
