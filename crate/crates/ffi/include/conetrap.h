/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef CONETRAP_H
#define CONETRAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_POINTER = 1,
  CT_STATUS_INVALID_UTF8 = 2,
  CT_STATUS_OUT_OF_RANGE = 3,
  CT_STATUS_ALPHA_OUT_OF_RANGE = 10,
  CT_STATUS_SIGN_VIOLATION = 11,
  CT_STATUS_NEGATIVE_DISSIPATION = 12,
  CT_STATUS_INVALID_CUTOFF = 13,
  CT_STATUS_GEOMETRY_KIND_MISMATCH = 14,
  CT_STATUS_MESH_FILE_INVALID = 15,
  CT_STATUS_POLE_QUADRATURE_FAILURE = 16,
  CT_STATUS_DEGENERATE_TRIANGLE = 17,
  CT_STATUS_MASS_MATRIX_SINGULAR = 20,
  CT_STATUS_NO_CONVERGENCE = 21,
  CT_STATUS_ENDPOINT_DEGENERACY = 30,
  CT_STATUS_NO_SPECTRAL_GAP = 31,
  CT_STATUS_NO_BLACK_HOLE_PAIR = 32,
  CT_STATUS_TRACKING_AMBIGUITY = 33,
  CT_STATUS_TAU_OUTSIDE_PLATEAU = 40,
  CT_STATUS_QUADRATURE_NOT_CONVERGED = 41,
  CT_STATUS_POINT_OUTSIDE_CHART = 42,
  CT_STATUS_CONFIG_PARSE = 50,
  CT_STATUS_CONFIG_VALIDATION = 51,
  CT_STATUS_INVALID_INPUT = 60,
  CT_STATUS_IO = 61,
  CT_STATUS_PANIC = 99,
} CtStatus;

/**
 * Parsed run description.
 */
typedef struct CtConfig CtConfig;

/**
 * An outgoing singular exponent of a circular cap.
 */
typedef struct CtExponent CtExponent;

/**
 * Output of a finished run.
 */
typedef struct CtRun CtRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Owned by the library;
 * valid until the next failing call on the same thread.
 */
const char *ct_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ct_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ct_string_free(char *s);

/**
 * Parses a TOML run description. `command` may be NULL to use the document's own.
 *
 * # Safety
 * `text` and `command` must be NULL or NUL-terminated; `out` must be writable.
 */
enum CtStatus ct_config_parse(const char *text, const char *command, struct CtConfig **out);

/**
 * # Safety
 * `config` must be NULL or a handle from [`ct_config_parse`], freed once.
 */
void ct_config_free(struct CtConfig *config);

/**
 * Executes a parsed config. A handle is produced even when the run itself
 * fails; the status then carries the run's error.
 *
 * # Safety
 * `config` must be a live handle; `out` must be writable.
 */
enum CtStatus ct_run(const struct CtConfig *config, struct CtRun **out);

/**
 * # Safety
 * `run` must be NULL or a handle from [`ct_run`], freed once.
 */
void ct_run_free(struct CtRun *run);

/**
 * Process exit code the command line tool would return (0, 1 or 2); -1 for NULL.
 *
 * # Safety
 * `run` must be NULL or a live handle.
 */
int32_t ct_run_exit_code(const struct CtRun *run);

/**
 * Number of data rows; 0 for NULL.
 *
 * # Safety
 * `run` must be NULL or a live handle.
 */
size_t ct_run_row_count(const struct CtRun *run);

/**
 * Number of columns; 0 for NULL.
 *
 * # Safety
 * `run` must be NULL or a live handle.
 */
size_t ct_run_column_count(const struct CtRun *run);

/**
 * Numeric cell `(row, column)`. Booleans read as 0/1; empty cells as NaN.
 *
 * # Safety
 * `run` must be a live handle; `value` must be writable.
 */
enum CtStatus ct_run_value(const struct CtRun *run, size_t row, size_t column, double *value);

/**
 * The run's table serialized as CSV (`json = false`) or JSON. Free with [`ct_string_free`].
 *
 * # Safety
 * `run` must be NULL or a live handle.
 */
char *ct_run_render(const struct CtRun *run, bool json);

/**
 * Leading outgoing exponent of a circular cap of angle `alpha` (radians)
 * for azimuthal mode `mode`, using `n_elements` quadratic elements.
 *
 * # Safety
 * `out` must be writable.
 */
enum CtStatus ct_cap_exponent(double alpha,
                              double eps_plus,
                              double eps_minus,
                              uint32_t mode,
                              size_t n_elements,
                              struct CtExponent **out);

/**
 * # Safety
 * `exponent` must be NULL or a handle from [`ct_cap_exponent`], freed once.
 */
void ct_exponent_free(struct CtExponent *exponent);

/**
 * Signed `η` of the outgoing exponent `−1/2 + iη`; NaN for NULL.
 *
 * # Safety
 * `exponent` must be NULL or a live handle.
 */
double ct_exponent_eta(const struct CtExponent *exponent);

/**
 * `∫ ε|Φ|²`; NaN for NULL.
 *
 * # Safety
 * `exponent` must be NULL or a live handle.
 */
double ct_exponent_d(const struct CtExponent *exponent);

/**
 * Spectral gap `β₀`; NaN for NULL.
 *
 * # Safety
 * `exponent` must be NULL or a live handle.
 */
double ct_exponent_beta0(const struct CtExponent *exponent);

/**
 * Slope `dλ/dδ` at `δ = 0`; NaN for NULL.
 *
 * # Safety
 * `exponent` must be NULL or a live handle.
 */
double ct_exponent_lambda_prime(const struct CtExponent *exponent);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONETRAP_H */
