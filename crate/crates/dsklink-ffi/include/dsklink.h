#ifndef DSKLINK_H
#define DSKLINK_H

/* Generated by cbindgen from the dsklink-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Call succeeded; all out-pointers hold valid results.
#define DSKLINK_OK 0

// An input failed validation (non-finite, out of the supported domain, or
// outside the model's regime). Details in the session's last error.
#define DSKLINK_ERR_INVALID_ARGUMENT 1

// The computation itself failed: quadrature did not converge, a threshold
// crossing was not found inside the horizon, or an internal panic was
// caught at the boundary.
#define DSKLINK_ERR_NUMERIC 2

// A required pointer (session or output) was null.
#define DSKLINK_ERR_NULL_POINTER 3

// Opaque handle owning the quadrature settings and the last error message.
//
// C code only ever sees `DsklinkSession *`; the layout is private.
typedef struct DsklinkSession DsklinkSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Allocates a session with default quadrature (48 nodes, 1e-10 relative
// tolerance) and an empty error message. Returns null only on allocation
// failure. Free with [`dsklink_session_free`].
struct DsklinkSession *dsklink_session_new(void);

// Releases a session created by [`dsklink_session_new`]. Passing null is a
// no-op.
//
// # Safety
//
// `session` must be null or a pointer obtained from
// [`dsklink_session_new`] that has not already been freed; the handle must
// not be used after this call.
void dsklink_session_free(struct DsklinkSession *session);

// Replaces the session's quadrature settings used by
// [`dsklink_j_dct_exact`]. `node_count` is the Gauss-Legendre panel order
// (at least 16); `relative_tolerance` must lie in (0, 1e-3].
//
// # Safety
//
// `session` must be a live pointer from [`dsklink_session_new`].
int32_t dsklink_session_set_quadrature(struct DsklinkSession *session,
                                       size_t node_count,
                                       double relative_tolerance);

// Copies the session's last error message into `buffer` as a NUL-terminated
// C string, truncating to `capacity - 1` bytes if needed. Returns the byte
// length of the full message (excluding the NUL), so a caller can detect
// truncation by comparing against `capacity`. With a null `buffer` or zero
// `capacity` nothing is written and only the length is reported. A null
// `session` returns 0.
//
// # Safety
//
// `session` must be null or a live pointer from [`dsklink_session_new`];
// `buffer`, when non-null, must point to at least `capacity` writable bytes.
size_t dsklink_session_last_error(const struct DsklinkSession *session,
                                  char *buffer,
                                  size_t capacity);

// Bessel function of the first kind, order zero, evaluated to better than
// 1e-15 absolute error across the toolkit's operating range. NaN maps to
// NaN, infinities to the decay limit 0, and arguments so extreme that the
// internal quadrature refuses to settle report NaN instead of aborting the
// caller.
double dsklink_j0(double x);

// Normalized coherence of a co-located reference after `t_c` seconds:
// carrier Doppler spread at wavelength `lambda_m` plus a residual
// oscillator offset `df_hz - df_prime_hz`, relative to bandwidth
// `bandwidth_hz`. Writes a value in [0, 1] to `out_value`. When
// `out_offset_exceeds_band` is non-null it receives `true` if the frequency
// offset alone pushed past the first sinc null (the clock reads zero there).
//
// # Safety
//
// `session` must be a live pointer from [`dsklink_session_new`];
// `out_value` must be a valid `double` pointer; `out_offset_exceeds_band`
// must be null or a valid `bool` pointer.
int32_t dsklink_j_cct(struct DsklinkSession *session,
                      double t_c_s,
                      double speed_mps,
                      double lambda_m,
                      double bandwidth_hz,
                      double df_hz,
                      double df_prime_hz,
                      double *out_value,
                      bool *out_offset_exceeds_band);

// Exact normalized coherence of a distributed two-element reference after
// `t_c_s` seconds of travel at `speed_mps` toward heading `theta_rad`, for
// a transmitter `distance_m` away and element offsets `(l1_m, phi1_rad)`
// and `(l2_m, phi2_rad)`. Uses the session's quadrature settings. Fails
// with `DSKLINK_ERR_INVALID_ARGUMENT` once the displacement reaches the
// transmitter distance scale (the model needs `t_c * v < d`).
//
// # Safety
//
// `session` must be a live pointer from [`dsklink_session_new`]; `out_value`
// must be a valid `double` pointer.
int32_t dsklink_j_dct_exact(struct DsklinkSession *session,
                            double t_c_s,
                            double speed_mps,
                            double distance_m,
                            double bandwidth_hz,
                            double l1_m,
                            double l2_m,
                            double phi1_rad,
                            double phi2_rad,
                            double theta_rad,
                            double *out_value);

// Closed-form lower bound on the distributed coherence for equal element
// radii (`l1_m = l2_m`); parameters as in [`dsklink_j_dct_exact`]. The
// bound never exceeds the exact value and needs no quadrature, so it is the
// cheap conservative clock.
//
// # Safety
//
// `session` must be a live pointer from [`dsklink_session_new`]; `out_value`
// must be a valid `double` pointer.
int32_t dsklink_j_dct_bound(struct DsklinkSession *session,
                            double t_c_s,
                            double speed_mps,
                            double distance_m,
                            double bandwidth_hz,
                            double l1_m,
                            double l2_m,
                            double phi1_rad,
                            double phi2_rad,
                            double theta_rad,
                            double *out_value);

// Time for the co-located clock to decay to `threshold` (in (0, 1)): the
// smallest `t` with `J(t) = threshold`, searched up to `t_max_s`. Writes
// the crossing in seconds. Returns `DSKLINK_ERR_NUMERIC` when the curve
// stays above the threshold over the whole horizon.
//
// # Safety
//
// `session` must be a live pointer from [`dsklink_session_new`];
// `out_seconds` must be a valid `double` pointer.
int32_t dsklink_cct_coherence_time(struct DsklinkSession *session,
                                   double speed_mps,
                                   double lambda_m,
                                   double bandwidth_hz,
                                   double df_hz,
                                   double df_prime_hz,
                                   double threshold,
                                   double t_max_s,
                                   double *out_seconds);

// Time for the conservative distributed clock (the closed-form bound with
// equal radii `l_m`) to decay to `threshold`. The bound's Bessel envelope
// is evaluated as a function of displacement, which stays meaningful past
// the fly-by horizon `d / v`, so `t_max_s` may exceed it; the exact
// integral cannot be used that far out. Writes the crossing in seconds.
//
// # Safety
//
// `session` must be a live pointer from [`dsklink_session_new`];
// `out_seconds` must be a valid `double` pointer.
int32_t dsklink_dct_bound_coherence_time(struct DsklinkSession *session,
                                         double speed_mps,
                                         double distance_m,
                                         double bandwidth_hz,
                                         double l_m,
                                         double threshold,
                                         double t_max_s,
                                         double *out_seconds);

// Free-space SNR of an `n_antennas`-element distributed receiver at range
// `distance_m`: transmit power `p_tx_w` (watts), carrier `carrier_hz`,
// per-antenna noise variance `noise_variance_w` (watts). Writes the
// per-antenna linear SNR and the coherent combining gain in dB; the
// combined SNR in dB is `10*log10(per_antenna) + array_gain_db`.
//
// # Safety
//
// `session` must be a live pointer from [`dsklink_session_new`];
// `out_per_antenna` and `out_array_gain_db` must be valid `double`
// pointers.
int32_t dsklink_snr(struct DsklinkSession *session,
                    double p_tx_w,
                    double carrier_hz,
                    double noise_variance_w,
                    double distance_m,
                    size_t n_antennas,
                    double *out_per_antenna,
                    double *out_array_gain_db);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DSKLINK_H */
