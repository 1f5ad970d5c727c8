#ifndef MCDIFF_H
#define MCDIFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `MCDIFF_STATUS_OK` is zero.
 */
typedef enum McdiffStatus {
  MCDIFF_STATUS_OK = 0,
  MCDIFF_STATUS_NULL_POINTER = 1,
  MCDIFF_STATUS_INVALID_ARGUMENT = 2,
  MCDIFF_STATUS_CONFIG = 3,
  MCDIFF_STATUS_DIMENSION = 4,
  MCDIFF_STATUS_NUMERICAL = 5,
  MCDIFF_STATUS_NO_SIGNAL = 6,
  MCDIFF_STATUS_IO = 7,
  MCDIFF_STATUS_PARSE = 8,
  MCDIFF_STATUS_PANIC = 9,
} McdiffStatus;

typedef enum McdiffDetectorKind {
  MCDIFF_DETECTOR_KIND_MLSD = 0,
  MCDIFF_DETECTOR_KIND_BANDED_MLSD = 1,
  MCDIFF_DETECTOR_KIND_MLDA = 2,
  MCDIFF_DETECTOR_KIND_MATD = 3,
  MCDIFF_DETECTOR_KIND_FSTD = 4,
  MCDIFF_DETECTOR_KIND_FTD = 5,
} McdiffDetectorKind;

/**
 * Discretized channel impulse response.
 */
typedef struct McdiffChannel McdiffChannel;

/**
 * A configured detector.
 */
typedef struct McdiffDetector McdiffDetector;

/**
 * A parsed and validated experiment configuration.
 */
typedef struct McdiffExperiment McdiffExperiment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mcdiff_version(void);

/**
 * Message of the last failure on this thread; empty if none. Valid until the next failing call.
 */
const char *mcdiff_last_error(void);

/**
 * Builds the channel for topology `(r0, rr, diffusion)` sampled at `N` slots per
 * symbol with symbol duration `rate_ratio` times the peak time.
 *
 * # Safety
 * `out` must be a valid pointer. On success `*out` owns a handle to free with
 * [`mcdiff_channel_free`].
 */
enum McdiffStatus mcdiff_channel_new(double r0,
                                     double rr,
                                     double diffusion,
                                     double rate_ratio,
                                     size_t samples_per_symbol,
                                     size_t memory,
                                     struct McdiffChannel **out);

/**
 * Number of taps (`L N`); zero for a null handle.
 *
 * # Safety
 * `channel` must be null or a live handle.
 */
size_t mcdiff_channel_len(const struct McdiffChannel *channel);

/**
 * Copies the taps into `out`, which must hold exactly [`mcdiff_channel_len`] values.
 *
 * # Safety
 * `channel` must be a live handle and `out` must point to `len` writable doubles.
 */
enum McdiffStatus mcdiff_channel_taps(const struct McdiffChannel *channel, double *out, size_t len);

/**
 * # Safety
 * `channel` must be null or a handle from [`mcdiff_channel_new`] not yet freed.
 */
void mcdiff_channel_free(struct McdiffChannel *channel);

/**
 * External noise rate per slot for a target SNR in dB.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum McdiffStatus mcdiff_snr_to_noise_rate(double snr_db,
                                           double molecules,
                                           size_t samples_per_symbol,
                                           double *out);

/**
 * Creates a detector. `window` is `L'` for banded MLSD and MLDA; `threshold`
 * is used by the threshold detectors. Other detectors ignore either value.
 *
 * # Safety
 * `channel` must be a live handle and `out` a valid pointer. On success `*out`
 * owns a handle to free with [`mcdiff_detector_free`].
 */
enum McdiffStatus mcdiff_detector_new(const struct McdiffChannel *channel,
                                      enum McdiffDetectorKind kind,
                                      size_t order,
                                      size_t window,
                                      double molecules,
                                      double noise_rate,
                                      double threshold,
                                      struct McdiffDetector **out);

/**
 * Decides every symbol of `samples` (length a multiple of `N`), writing 0 or 1
 * to `bits`, which must hold `samples_len / N` bytes.
 *
 * # Safety
 * `detector` must be a live handle, `samples` must point to `samples_len`
 * doubles and `bits` to `bits_len` writable bytes.
 */
enum McdiffStatus mcdiff_detector_detect(const struct McdiffDetector *detector,
                                         const double *samples,
                                         size_t samples_len,
                                         uint8_t *bits,
                                         size_t bits_len);

/**
 * # Safety
 * `detector` must be null or a handle from [`mcdiff_detector_new`] not yet freed.
 */
void mcdiff_detector_free(struct McdiffDetector *detector);

/**
 * Closed-form BER of FSTD or MaTD at the threshold that minimizes it, over the
 * channel's full memory.
 *
 * # Safety
 * `channel` must be a live handle; `threshold` and `ber` valid pointers.
 */
enum McdiffStatus mcdiff_theory_ber(const struct McdiffChannel *channel,
                                    enum McdiffDetectorKind kind,
                                    size_t order,
                                    double molecules,
                                    double noise_rate,
                                    double *threshold,
                                    double *ber);

/**
 * SINR-maximizing derivative order in `0..=max_order` with receiver memory `window`.
 *
 * # Safety
 * `channel` must be a live handle and `order` a valid pointer.
 */
enum McdiffStatus mcdiff_optimal_order(const struct McdiffChannel *channel,
                                       double molecules,
                                       double noise_rate,
                                       size_t max_order,
                                       size_t window,
                                       size_t *order);

/**
 * Parses and validates an experiment from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer. On success
 * `*out` owns a handle to free with [`mcdiff_experiment_free`].
 */
enum McdiffStatus mcdiff_experiment_from_json(const char *json, struct McdiffExperiment **out);

/**
 * Reads, parses and validates an experiment file.
 *
 * # Safety
 * As [`mcdiff_experiment_from_json`], with `path` a NUL-terminated path.
 */
enum McdiffStatus mcdiff_experiment_load(const char *path, struct McdiffExperiment **out);

/**
 * Overrides the master seed.
 *
 * # Safety
 * `experiment` must be a live handle.
 */
enum McdiffStatus mcdiff_experiment_set_seed(struct McdiffExperiment *experiment, uint64_t seed);

/**
 * Runs a figure sweep (`"fig4"`, `"fig5"`, `"fig7"` or `"fig8"`) and returns the
 * CSV as a newly allocated string to release with [`mcdiff_string_free`].
 *
 * # Safety
 * `experiment` must be a live handle, `figure` a NUL-terminated string and
 * `csv` a valid pointer.
 */
enum McdiffStatus mcdiff_experiment_sweep(const struct McdiffExperiment *experiment,
                                          const char *figure,
                                          bool timing,
                                          char **csv);

/**
 * # Safety
 * `experiment` must be null or a handle not yet freed.
 */
void mcdiff_experiment_free(struct McdiffExperiment *experiment);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void mcdiff_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCDIFF_H */
