#ifndef DSTEK_H
#define DSTEK_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DstekStatus {
  DSTEK_STATUS_OK = 0,
  DSTEK_STATUS_NULL_POINTER = 1,
  DSTEK_STATUS_INVALID_ARGUMENT = 2,
  DSTEK_STATUS_ASSUMPTION_VIOLATED = 3,
  DSTEK_STATUS_SHIFT_IS_EIGENVALUE = 4,
  DSTEK_STATUS_INTERIOR_RESONANCE = 5,
  DSTEK_STATUS_NO_ROOT = 6,
  DSTEK_STATUS_BUFFER_TOO_SMALL = 7,
  DSTEK_STATUS_NUMERICAL_FAILURE = 8,
  DSTEK_STATUS_PANIC = 9,
} DstekStatus;

/**
 * Opaque layered medium.
 */
typedef struct DstekMedium DstekMedium;

typedef struct DstekComplex {
  double re;
  double im;
} DstekComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a medium from `n` shells, innermost first.
 *
 * # Safety
 * `radii`, `eps_re` and `eps_im` must point to `n` readable doubles and
 * `out` to writable storage for one handle.
 */
enum DstekStatus dstek_medium_new(const double *radii,
                                  const double *eps_re,
                                  const double *eps_im,
                                  size_t n,
                                  struct DstekMedium **out);

/**
 * Releases a medium. Null is ignored.
 *
 * # Safety
 * `handle` must come from `dstek_medium_new` and not be used afterwards.
 */
void dstek_medium_free(struct DstekMedium *handle);

/**
 * Number of shells of the medium, 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live medium.
 */
size_t dstek_medium_shell_count(const struct DstekMedium *handle);

/**
 * TE delta-Stekloff eigenvalue of degree `l`.
 *
 * # Safety
 * `handle` must be a live medium and `out` writable.
 */
enum DstekStatus dstek_eigenvalue(const struct DstekMedium *handle,
                                  double k,
                                  double delta,
                                  size_t l,
                                  struct DstekComplex *out);

/**
 * Eigenvalues for degrees `1..=l_max`, sorted by real part, imaginary part,
 * degree. Resonant degrees are skipped. Writes up to `capacity` entries and
 * the full count to `out_len`; returns `BUFFER_TOO_SMALL` if it did not fit.
 *
 * # Safety
 * `lambdas` and `degrees` must have room for `capacity` entries, `out_len`
 * must be writable.
 */
enum DstekStatus dstek_spectrum(const struct DstekMedium *handle,
                                double k,
                                double delta,
                                size_t l_max,
                                struct DstekComplex *lambdas,
                                size_t *degrees,
                                size_t capacity,
                                size_t *out_len);

/**
 * Entry of the shifted solution operator on degree `l`.
 *
 * # Safety
 * `handle` must be a live medium and `out` writable.
 */
enum DstekStatus dstek_t_entry(const struct DstekMedium *handle,
                               double k,
                               double delta,
                               double z,
                               size_t l,
                               struct DstekComplex *out);

/**
 * Scattering coefficients of degree `l`.
 *
 * # Safety
 * `handle` must be a live medium, `te` and `tm` writable.
 */
enum DstekStatus dstek_mie_coefficients(const struct DstekMedium *handle,
                                        double k,
                                        size_t l,
                                        struct DstekComplex *te,
                                        struct DstekComplex *tm);

/**
 * Eigenvalue recovered from far-field data by the closed-form Moebius fit.
 * `noise` is the relative perturbation of the measured entry (0 for none).
 *
 * # Safety
 * `handle` must be a live medium and `out` writable.
 */
enum DstekStatus dstek_detect(const struct DstekMedium *handle,
                              double k,
                              double delta,
                              size_t l,
                              double noise,
                              uint64_t seed,
                              struct DstekComplex *out);

/**
 * Sets `all_clear` to whether no degree `1..=l_max` is resonant at `k`.
 *
 * # Safety
 * `handle` must be a live medium and `all_clear` writable.
 */
enum DstekStatus dstek_check_assumption(const struct DstekMedium *handle,
                                        double k,
                                        size_t l_max,
                                        bool *all_clear);

/**
 * Copies the last error of this thread, NUL-terminated and truncated to
 * `len`. Returns the untruncated length without the terminator.
 *
 * # Safety
 * `buf` must be null or have room for `len` bytes.
 */
size_t dstek_last_error_message(char *buf, size_t len);

/**
 * Static description of a status code.
 */
const char *dstek_status_str(enum DstekStatus status);

const char *dstek_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSTEK_H */
