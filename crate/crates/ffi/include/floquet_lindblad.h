#ifndef FLOQUET_LINDBLAD_H
#define FLOQUET_LINDBLAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; regenerate with `cargo build -p floquet-lindblad-ffi --features header`. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FlSpectralClass {
  FL_SPECTRAL_CLASS_TRANSIENT = 0,
  FL_SPECTRAL_CLASS_NON_DECAYING = 1,
  FL_SPECTRAL_CLASS_STEADY = 2,
  FL_SPECTRAL_CLASS_GROWING = 3,
} FlSpectralClass;

/**
 * Status codes. Values 2 to 7 coincide with the command-line exit codes.
 */
typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_ARGUMENT = 1,
  FL_STATUS_CONFIG = 2,
  FL_STATUS_PARSE = 3,
  FL_STATUS_VALIDATION = 4,
  FL_STATUS_NUMERICAL = 5,
  FL_STATUS_IO = 7,
  FL_STATUS_BUFFER_TOO_SMALL = 8,
  FL_STATUS_INDEX_OUT_OF_RANGE = 9,
  FL_STATUS_INVALID_UTF8 = 10,
  FL_STATUS_PANIC = 99,
} FlStatus;

/**
 * A two-band k-grid.
 */
typedef struct FlBand FlBand;

/**
 * A validated Lindblad model.
 */
typedef struct FlModel FlModel;

/**
 * Result of an optics sweep.
 */
typedef struct FlOptics FlOptics;

/**
 * Floquet spectrum of a model's one-period map.
 */
typedef struct FlSpectrum FlSpectrum;

typedef struct FlComplex {
  double re;
  double im;
} FlComplex;

/**
 * Response of one k-point.
 */
typedef struct FlKResponse {
  double k;
  double weight;
  double sigma[3];
  double j_dc;
  struct FlComplex j_shg;
  struct FlComplex j_linear;
} FlKResponse;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * NUL-terminated version string with static lifetime.
 */
const char *fl_version(void);

/**
 * Copies the last error message of this thread into `buf` (truncated and
 * always NUL-terminated when `len > 0`). Returns the full message length
 * plus one, so a caller can size a buffer with `fl_last_error(NULL, 0)`.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t fl_last_error(char *buf, size_t len);

/**
 * Parses and validates a model document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FlStatus fl_model_from_json(const char *json, struct FlModel **out);

/**
 * # Safety
 * `model` must be null or a pointer returned by `fl_model_from_json`.
 */
void fl_model_free(struct FlModel *model);

/**
 * Hilbert-space dimension, 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live model handle.
 */
size_t fl_model_dim(const struct FlModel *model);

/**
 * Spectrum of the one-period map. `slices` of 0 selects the default.
 *
 * # Safety
 * `model` must be a live model handle; `out` must be writable.
 */
enum FlStatus fl_spectrum_compute(const struct FlModel *model,
                                  size_t slices,
                                  struct FlSpectrum **out);

/**
 * # Safety
 * `spectrum` must be null or a pointer returned by `fl_spectrum_compute`.
 */
void fl_spectrum_free(struct FlSpectrum *spectrum);

/**
 * Number of eigenvalues, 0 for a null handle.
 *
 * # Safety
 * `spectrum` must be null or a live spectrum handle.
 */
size_t fl_spectrum_len(const struct FlSpectrum *spectrum);

/**
 * Eigenvalue `index` and its class. Eigenvalues are ordered by decreasing
 * modulus. `class` may be null.
 *
 * # Safety
 * `spectrum` must be a live handle; `value` writable; `class` null or writable.
 */
enum FlStatus fl_spectrum_eigenvalue(const struct FlSpectrum *spectrum,
                                     size_t index,
                                     struct FlComplex *value,
                                     enum FlSpectralClass *class_);

/**
 * Periodic steady state at the start of the period, written row-major into
 * `rho` (dim × dim entries). `slices` of 0 selects the default.
 *
 * # Safety
 * `model` must be a live handle; `rho` must be valid for `len` elements.
 */
enum FlStatus fl_ness_compute(const struct FlModel *model,
                              size_t slices,
                              struct FlComplex *rho,
                              size_t len);

/**
 * Parses and validates a two-band document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FlStatus fl_band_from_json(const char *json, struct FlBand **out);

/**
 * # Safety
 * `band` must be null or a pointer returned by `fl_band_from_json`.
 */
void fl_band_free(struct FlBand *band);

/**
 * # Safety
 * `band` must be a live handle; `out` must be writable.
 */
enum FlStatus fl_optics_sweep(const struct FlBand *band, struct FlOptics **out);

/**
 * # Safety
 * `optics` must be null or a pointer returned by `fl_optics_sweep`.
 */
void fl_optics_free(struct FlOptics *optics);

/**
 * Number of k-points, 0 for a null handle.
 *
 * # Safety
 * `optics` must be null or a live handle.
 */
size_t fl_optics_len(const struct FlOptics *optics);

/**
 * Weighted totals. Any output pointer may be null.
 *
 * # Safety
 * `optics` must be a live handle; outputs null or writable.
 */
enum FlStatus fl_optics_totals(const struct FlOptics *optics,
                               double *dc,
                               struct FlComplex *shg,
                               struct FlComplex *linear);

/**
 * # Safety
 * `optics` must be a live handle; `out` must be writable.
 */
enum FlStatus fl_optics_point(const struct FlOptics *optics, size_t index, struct FlKResponse *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOQUET_LINDBLAD_H */
