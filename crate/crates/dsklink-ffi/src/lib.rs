//! C ABI for the dsklink coherence and link-budget toolkit.
//!
//! The surface is deliberately small: the pieces of the library that embed
//! naturally in non-Rust planning tools are the coherence clocks (how long a
//! distributed-array phase reference stays valid), the Bessel kernel behind
//! them, and the free-space SNR budget. Monte Carlo scenario sweeps stay on
//! the Rust side where rayon and the seeding discipline live; batch callers
//! should drive the `dsklink` CLI instead.
//!
//! Conventions:
//!
//! * Every fallible call returns an `int32_t` status code and writes results
//!   through out-pointers. `DSKLINK_OK` (0) means the outputs are valid.
//! * A non-zero status leaves a human-readable message in the session, which
//!   [`dsklink_session_last_error`] copies out. Messages are overwritten by
//!   the next failing call on the same session and cleared by a success.
//! * Sessions are opaque, single-threaded handles. Two sessions may be used
//!   from two threads; one session must not be shared without external
//!   locking.
//! * All angles are radians, distances meters, times seconds, frequencies
//!   hertz, powers watts.
//!
//! The committed header `include/dsklink.h` is regenerated by the build
//! script on every compile and must not be edited by hand.

use core::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use dsklink::coherence::{
    coherence_time, j_cct, j_dct_exact, j_dct_lower_bound, CoherenceError, CoherenceQuery,
    QuadratureSpec,
};
use dsklink::impairments::{snr, LinkBudget};
use dsklink::numerics::bessel_j0;

// ---------------------------------------------------------------------------
// Status codes
// ---------------------------------------------------------------------------

/// Call succeeded; all out-pointers hold valid results.
pub const DSKLINK_OK: i32 = 0;
/// An input failed validation (non-finite, out of the supported domain, or
/// outside the model's regime). Details in the session's last error.
pub const DSKLINK_ERR_INVALID_ARGUMENT: i32 = 1;
/// The computation itself failed: quadrature did not converge, a threshold
/// crossing was not found inside the horizon, or an internal panic was
/// caught at the boundary.
pub const DSKLINK_ERR_NUMERIC: i32 = 2;
/// A required pointer (session or output) was null.
pub const DSKLINK_ERR_NULL_POINTER: i32 = 3;

// ---------------------------------------------------------------------------
// Session handle
// ---------------------------------------------------------------------------

/// Opaque handle owning the quadrature settings and the last error message.
///
/// C code only ever sees `DsklinkSession *`; the layout is private.
pub struct DsklinkSession {
    spec: QuadratureSpec,
    last_error: String,
}

impl DsklinkSession {
    fn ok(&mut self) -> i32 {
        self.last_error.clear();
        DSKLINK_OK
    }

    fn fail(&mut self, code: i32, message: impl Into<String>) -> i32 {
        self.last_error = message.into();
        code
    }
}

/// Default quadrature for new sessions: matches the CLI's coherence runs.
fn default_spec() -> QuadratureSpec {
    QuadratureSpec::new(48, 1e-10).expect("the built-in quadrature spec is valid")
}

/// Maps a coherence-layer error onto the C status codes. Domain and regime
/// violations are the caller's problem; a missing crossing or a quadrature
/// failure is a numeric outcome.
fn coherence_code(err: &CoherenceError) -> i32 {
    match err {
        CoherenceError::OutOfRegime { .. }
        | CoherenceError::AsymmetricBound { .. }
        | CoherenceError::InvalidQuadratureSpec(_)
        | CoherenceError::ThresholdNotBelowStart { .. }
        | CoherenceError::TooFewSamples { .. }
        | CoherenceError::StepNotBelowDistance { .. } => DSKLINK_ERR_INVALID_ARGUMENT,
        CoherenceError::NoCrossing { .. } | CoherenceError::Quadrature(_) => DSKLINK_ERR_NUMERIC,
    }
}

/// Rejects non-finite inputs up front so the engines never see NaN.
fn finite_or_message(args: &[(&'static str, f64)]) -> Result<(), String> {
    for (name, value) in args {
        if !value.is_finite() {
            return Err(format!("{name} must be finite, got {value}"));
        }
    }
    Ok(())
}

/// Null-checks the session, then runs `body` with panics contained. A panic
/// must not unwind across the C boundary (that aborts the process), so it is
/// converted into `DSKLINK_ERR_NUMERIC` with a diagnostic message.
unsafe fn guarded(
    session: *mut DsklinkSession,
    body: impl FnOnce(&mut DsklinkSession) -> i32,
) -> i32 {
    if session.is_null() {
        return DSKLINK_ERR_NULL_POINTER;
    }
    match catch_unwind(AssertUnwindSafe(|| body(&mut *session))) {
        Ok(code) => code,
        Err(_) => {
            (*session).last_error = String::from("internal panic caught at the C boundary");
            DSKLINK_ERR_NUMERIC
        }
    }
}

// ---------------------------------------------------------------------------
// Session lifecycle
// ---------------------------------------------------------------------------

/// Allocates a session with default quadrature (48 nodes, 1e-10 relative
/// tolerance) and an empty error message. Returns null only on allocation
/// failure. Free with [`dsklink_session_free`].
#[no_mangle]
pub extern "C" fn dsklink_session_new() -> *mut DsklinkSession {
    Box::into_raw(Box::new(DsklinkSession {
        spec: default_spec(),
        last_error: String::new(),
    }))
}

/// Releases a session created by [`dsklink_session_new`]. Passing null is a
/// no-op.
///
/// # Safety
///
/// `session` must be null or a pointer obtained from
/// [`dsklink_session_new`] that has not already been freed; the handle must
/// not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn dsklink_session_free(session: *mut DsklinkSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Replaces the session's quadrature settings used by
/// [`dsklink_j_dct_exact`]. `node_count` is the Gauss-Legendre panel order
/// (at least 16); `relative_tolerance` must lie in (0, 1e-3].
///
/// # Safety
///
/// `session` must be a live pointer from [`dsklink_session_new`].
#[no_mangle]
pub unsafe extern "C" fn dsklink_session_set_quadrature(
    session: *mut DsklinkSession,
    node_count: usize,
    relative_tolerance: f64,
) -> i32 {
    guarded(session, |session| {
        match QuadratureSpec::new(node_count, relative_tolerance) {
            Ok(spec) => {
                session.spec = spec;
                session.ok()
            }
            Err(err) => session.fail(coherence_code(&err), err.to_string()),
        }
    })
}

/// Copies the session's last error message into `buffer` as a NUL-terminated
/// C string, truncating to `capacity - 1` bytes if needed. Returns the byte
/// length of the full message (excluding the NUL), so a caller can detect
/// truncation by comparing against `capacity`. With a null `buffer` or zero
/// `capacity` nothing is written and only the length is reported. A null
/// `session` returns 0.
///
/// # Safety
///
/// `session` must be null or a live pointer from [`dsklink_session_new`];
/// `buffer`, when non-null, must point to at least `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dsklink_session_last_error(
    session: *const DsklinkSession,
    buffer: *mut c_char,
    capacity: usize,
) -> usize {
    let Some(session) = session.as_ref() else {
        return 0;
    };
    let message = session.last_error.as_bytes();
    if !buffer.is_null() && capacity > 0 {
        let copy = message.len().min(capacity - 1);
        std::ptr::copy_nonoverlapping(message.as_ptr(), buffer.cast::<u8>(), copy);
        *buffer.add(copy) = 0;
    }
    message.len()
}

// ---------------------------------------------------------------------------
// Bessel kernel
// ---------------------------------------------------------------------------

/// Bessel function of the first kind, order zero, evaluated to better than
/// 1e-15 absolute error across the toolkit's operating range. NaN maps to
/// NaN, infinities to the decay limit 0, and arguments so extreme that the
/// internal quadrature refuses to settle report NaN instead of aborting the
/// caller.
#[no_mangle]
pub extern "C" fn dsklink_j0(x: f64) -> f64 {
    catch_unwind(|| bessel_j0(x)).unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Coherence evaluations
// ---------------------------------------------------------------------------

/// Builds a query for the conventional (co-located) coherence clock. Fields
/// that only matter to the distributed clock get harmless placeholders.
fn cct_query(t_c: f64, speed: f64, lambda: f64, bandwidth: f64, df: f64, df_prime: f64) -> CoherenceQuery {
    CoherenceQuery {
        t_c,
        speed,
        d: 1.0,
        lambda,
        bandwidth,
        l1: 0.01,
        l2: 0.01,
        phi1: 0.0,
        phi2: std::f64::consts::PI,
        theta: 0.0,
        df,
        df_prime,
    }
}

/// Builds a query for the distributed-array coherence integrals. The
/// wavelength and oscillator offsets do not enter them. The argument list
/// mirrors the flat C parameter order one-to-one.
#[allow(clippy::too_many_arguments)]
fn dct_query(
    t_c: f64,
    speed: f64,
    d: f64,
    bandwidth: f64,
    l1: f64,
    l2: f64,
    phi1: f64,
    phi2: f64,
    theta: f64,
) -> CoherenceQuery {
    CoherenceQuery {
        t_c,
        speed,
        d,
        lambda: 1.0,
        bandwidth,
        l1,
        l2,
        phi1,
        phi2,
        theta,
        df: 0.0,
        df_prime: 0.0,
    }
}

/// Normalized coherence of a co-located reference after `t_c` seconds:
/// carrier Doppler spread at wavelength `lambda_m` plus a residual
/// oscillator offset `df_hz - df_prime_hz`, relative to bandwidth
/// `bandwidth_hz`. Writes a value in [0, 1] to `out_value`. When
/// `out_offset_exceeds_band` is non-null it receives `true` if the frequency
/// offset alone pushed past the first sinc null (the clock reads zero there).
///
/// # Safety
///
/// `session` must be a live pointer from [`dsklink_session_new`];
/// `out_value` must be a valid `double` pointer; `out_offset_exceeds_band`
/// must be null or a valid `bool` pointer.
#[no_mangle]
pub unsafe extern "C" fn dsklink_j_cct(
    session: *mut DsklinkSession,
    t_c_s: f64,
    speed_mps: f64,
    lambda_m: f64,
    bandwidth_hz: f64,
    df_hz: f64,
    df_prime_hz: f64,
    out_value: *mut f64,
    out_offset_exceeds_band: *mut bool,
) -> i32 {
    guarded(session, |session| {
        if out_value.is_null() {
            return session.fail(DSKLINK_ERR_NULL_POINTER, "out_value is null");
        }
        if let Err(message) = finite_or_message(&[
            ("t_c_s", t_c_s),
            ("speed_mps", speed_mps),
            ("lambda_m", lambda_m),
            ("bandwidth_hz", bandwidth_hz),
            ("df_hz", df_hz),
            ("df_prime_hz", df_prime_hz),
        ]) {
            return session.fail(DSKLINK_ERR_INVALID_ARGUMENT, message);
        }
        if t_c_s < 0.0 || speed_mps < 0.0 || lambda_m <= 0.0 || bandwidth_hz <= 0.0 {
            return session.fail(
                DSKLINK_ERR_INVALID_ARGUMENT,
                format!(
                    "need t_c_s >= 0, speed_mps >= 0, lambda_m > 0, bandwidth_hz > 0; \
                     got {t_c_s}, {speed_mps}, {lambda_m}, {bandwidth_hz}"
                ),
            );
        }
        let report = j_cct(&cct_query(t_c_s, speed_mps, lambda_m, bandwidth_hz, df_hz, df_prime_hz));
        *out_value = report.value;
        if !out_offset_exceeds_band.is_null() {
            *out_offset_exceeds_band = report.offset_exceeds_band;
        }
        session.ok()
    })
}

/// Shared validation for the distributed-clock calls: finite inputs and the
/// geometric domain (positive distance, bandwidth and radii; displacement
/// below the transmitter distance is enforced by the engine itself). The
/// argument list mirrors the flat C parameter order one-to-one.
#[allow(clippy::too_many_arguments)]
fn validate_dct_args(
    t_c_s: f64,
    speed_mps: f64,
    distance_m: f64,
    bandwidth_hz: f64,
    l1_m: f64,
    l2_m: f64,
    phi1_rad: f64,
    phi2_rad: f64,
    theta_rad: f64,
) -> Result<(), String> {
    finite_or_message(&[
        ("t_c_s", t_c_s),
        ("speed_mps", speed_mps),
        ("distance_m", distance_m),
        ("bandwidth_hz", bandwidth_hz),
        ("l1_m", l1_m),
        ("l2_m", l2_m),
        ("phi1_rad", phi1_rad),
        ("phi2_rad", phi2_rad),
        ("theta_rad", theta_rad),
    ])?;
    if t_c_s < 0.0 || speed_mps < 0.0 || distance_m <= 0.0 || bandwidth_hz <= 0.0 {
        return Err(format!(
            "need t_c_s >= 0, speed_mps >= 0, distance_m > 0, bandwidth_hz > 0; \
             got {t_c_s}, {speed_mps}, {distance_m}, {bandwidth_hz}"
        ));
    }
    if l1_m <= 0.0 || l2_m <= 0.0 {
        return Err(format!("element radii must be positive, got l1_m = {l1_m}, l2_m = {l2_m}"));
    }
    Ok(())
}

/// Exact normalized coherence of a distributed two-element reference after
/// `t_c_s` seconds of travel at `speed_mps` toward heading `theta_rad`, for
/// a transmitter `distance_m` away and element offsets `(l1_m, phi1_rad)`
/// and `(l2_m, phi2_rad)`. Uses the session's quadrature settings. Fails
/// with `DSKLINK_ERR_INVALID_ARGUMENT` once the displacement reaches the
/// transmitter distance scale (the model needs `t_c * v < d`).
///
/// # Safety
///
/// `session` must be a live pointer from [`dsklink_session_new`]; `out_value`
/// must be a valid `double` pointer.
#[no_mangle]
pub unsafe extern "C" fn dsklink_j_dct_exact(
    session: *mut DsklinkSession,
    t_c_s: f64,
    speed_mps: f64,
    distance_m: f64,
    bandwidth_hz: f64,
    l1_m: f64,
    l2_m: f64,
    phi1_rad: f64,
    phi2_rad: f64,
    theta_rad: f64,
    out_value: *mut f64,
) -> i32 {
    guarded(session, |session| {
        if out_value.is_null() {
            return session.fail(DSKLINK_ERR_NULL_POINTER, "out_value is null");
        }
        if let Err(message) = validate_dct_args(
            t_c_s, speed_mps, distance_m, bandwidth_hz, l1_m, l2_m, phi1_rad, phi2_rad, theta_rad,
        ) {
            return session.fail(DSKLINK_ERR_INVALID_ARGUMENT, message);
        }
        let query = dct_query(
            t_c_s, speed_mps, distance_m, bandwidth_hz, l1_m, l2_m, phi1_rad, phi2_rad, theta_rad,
        );
        match j_dct_exact(&query, &session.spec) {
            Ok(value) => {
                *out_value = value;
                session.ok()
            }
            Err(err) => session.fail(coherence_code(&err), err.to_string()),
        }
    })
}

/// Closed-form lower bound on the distributed coherence for equal element
/// radii (`l1_m = l2_m`); parameters as in [`dsklink_j_dct_exact`]. The
/// bound never exceeds the exact value and needs no quadrature, so it is the
/// cheap conservative clock.
///
/// # Safety
///
/// `session` must be a live pointer from [`dsklink_session_new`]; `out_value`
/// must be a valid `double` pointer.
#[no_mangle]
pub unsafe extern "C" fn dsklink_j_dct_bound(
    session: *mut DsklinkSession,
    t_c_s: f64,
    speed_mps: f64,
    distance_m: f64,
    bandwidth_hz: f64,
    l1_m: f64,
    l2_m: f64,
    phi1_rad: f64,
    phi2_rad: f64,
    theta_rad: f64,
    out_value: *mut f64,
) -> i32 {
    guarded(session, |session| {
        if out_value.is_null() {
            return session.fail(DSKLINK_ERR_NULL_POINTER, "out_value is null");
        }
        if let Err(message) = validate_dct_args(
            t_c_s, speed_mps, distance_m, bandwidth_hz, l1_m, l2_m, phi1_rad, phi2_rad, theta_rad,
        ) {
            return session.fail(DSKLINK_ERR_INVALID_ARGUMENT, message);
        }
        let query = dct_query(
            t_c_s, speed_mps, distance_m, bandwidth_hz, l1_m, l2_m, phi1_rad, phi2_rad, theta_rad,
        );
        match j_dct_lower_bound(&query) {
            Ok(value) => {
                *out_value = value;
                session.ok()
            }
            Err(err) => session.fail(coherence_code(&err), err.to_string()),
        }
    })
}

// ---------------------------------------------------------------------------
// Coherence times
// ---------------------------------------------------------------------------

/// Time for the co-located clock to decay to `threshold` (in (0, 1)): the
/// smallest `t` with `J(t) = threshold`, searched up to `t_max_s`. Writes
/// the crossing in seconds. Returns `DSKLINK_ERR_NUMERIC` when the curve
/// stays above the threshold over the whole horizon.
///
/// # Safety
///
/// `session` must be a live pointer from [`dsklink_session_new`];
/// `out_seconds` must be a valid `double` pointer.
#[no_mangle]
pub unsafe extern "C" fn dsklink_cct_coherence_time(
    session: *mut DsklinkSession,
    speed_mps: f64,
    lambda_m: f64,
    bandwidth_hz: f64,
    df_hz: f64,
    df_prime_hz: f64,
    threshold: f64,
    t_max_s: f64,
    out_seconds: *mut f64,
) -> i32 {
    guarded(session, |session| {
        if out_seconds.is_null() {
            return session.fail(DSKLINK_ERR_NULL_POINTER, "out_seconds is null");
        }
        if let Err(message) = finite_or_message(&[
            ("speed_mps", speed_mps),
            ("lambda_m", lambda_m),
            ("bandwidth_hz", bandwidth_hz),
            ("df_hz", df_hz),
            ("df_prime_hz", df_prime_hz),
            ("threshold", threshold),
            ("t_max_s", t_max_s),
        ]) {
            return session.fail(DSKLINK_ERR_INVALID_ARGUMENT, message);
        }
        if speed_mps < 0.0 || lambda_m <= 0.0 || bandwidth_hz <= 0.0 || t_max_s <= 0.0 {
            return session.fail(
                DSKLINK_ERR_INVALID_ARGUMENT,
                format!(
                    "need speed_mps >= 0, lambda_m > 0, bandwidth_hz > 0, t_max_s > 0; \
                     got {speed_mps}, {lambda_m}, {bandwidth_hz}, {t_max_s}"
                ),
            );
        }
        if !(0.0..1.0).contains(&threshold) || threshold == 0.0 {
            return session.fail(
                DSKLINK_ERR_INVALID_ARGUMENT,
                format!("threshold must lie strictly between 0 and 1, got {threshold}"),
            );
        }
        let base = cct_query(0.0, speed_mps, lambda_m, bandwidth_hz, df_hz, df_prime_hz);
        let curve = |t: f64| j_cct(&base.with_t_c(t)).value;
        match coherence_time(curve, threshold, t_max_s) {
            Ok(seconds) => {
                *out_seconds = seconds;
                session.ok()
            }
            Err(err) => session.fail(coherence_code(&err), err.to_string()),
        }
    })
}

/// Time for the conservative distributed clock (the closed-form bound with
/// equal radii `l_m`) to decay to `threshold`. The bound's Bessel envelope
/// is evaluated as a function of displacement, which stays meaningful past
/// the fly-by horizon `d / v`, so `t_max_s` may exceed it; the exact
/// integral cannot be used that far out. Writes the crossing in seconds.
///
/// # Safety
///
/// `session` must be a live pointer from [`dsklink_session_new`];
/// `out_seconds` must be a valid `double` pointer.
#[no_mangle]
pub unsafe extern "C" fn dsklink_dct_bound_coherence_time(
    session: *mut DsklinkSession,
    speed_mps: f64,
    distance_m: f64,
    bandwidth_hz: f64,
    l_m: f64,
    threshold: f64,
    t_max_s: f64,
    out_seconds: *mut f64,
) -> i32 {
    guarded(session, |session| {
        if out_seconds.is_null() {
            return session.fail(DSKLINK_ERR_NULL_POINTER, "out_seconds is null");
        }
        if let Err(message) = finite_or_message(&[
            ("speed_mps", speed_mps),
            ("distance_m", distance_m),
            ("bandwidth_hz", bandwidth_hz),
            ("l_m", l_m),
            ("threshold", threshold),
            ("t_max_s", t_max_s),
        ]) {
            return session.fail(DSKLINK_ERR_INVALID_ARGUMENT, message);
        }
        if speed_mps <= 0.0 || distance_m <= 0.0 || bandwidth_hz <= 0.0 || l_m <= 0.0 || t_max_s <= 0.0 {
            return session.fail(
                DSKLINK_ERR_INVALID_ARGUMENT,
                format!(
                    "need speed_mps > 0, distance_m > 0, bandwidth_hz > 0, l_m > 0, t_max_s > 0; \
                     got {speed_mps}, {distance_m}, {bandwidth_hz}, {l_m}, {t_max_s}"
                ),
            );
        }
        if !(0.0..1.0).contains(&threshold) || threshold == 0.0 {
            return session.fail(
                DSKLINK_ERR_INVALID_ARGUMENT,
                format!("threshold must lie strictly between 0 and 1, got {threshold}"),
            );
        }
        let base = dct_query(
            0.0,
            speed_mps,
            distance_m,
            bandwidth_hz,
            l_m,
            l_m,
            0.0,
            std::f64::consts::PI,
            std::f64::consts::FRAC_PI_4,
        );
        // The bound depends on geometry only through the normalized
        // displacement, so extending it past g = 1 is evaluating the same
        // Bessel envelope at larger arguments; the library function itself
        // carries no regime gate.
        let curve = |t: f64| j_dct_lower_bound(&base.with_t_c(t)).unwrap_or(f64::NAN);
        if let Err(err) = j_dct_lower_bound(&base) {
            return session.fail(coherence_code(&err), err.to_string());
        }
        match coherence_time(curve, threshold, t_max_s) {
            Ok(seconds) => {
                *out_seconds = seconds;
                session.ok()
            }
            Err(err) => session.fail(coherence_code(&err), err.to_string()),
        }
    })
}

// ---------------------------------------------------------------------------
// Link budget
// ---------------------------------------------------------------------------

/// Free-space SNR of an `n_antennas`-element distributed receiver at range
/// `distance_m`: transmit power `p_tx_w` (watts), carrier `carrier_hz`,
/// per-antenna noise variance `noise_variance_w` (watts). Writes the
/// per-antenna linear SNR and the coherent combining gain in dB; the
/// combined SNR in dB is `10*log10(per_antenna) + array_gain_db`.
///
/// # Safety
///
/// `session` must be a live pointer from [`dsklink_session_new`];
/// `out_per_antenna` and `out_array_gain_db` must be valid `double`
/// pointers.
#[no_mangle]
pub unsafe extern "C" fn dsklink_snr(
    session: *mut DsklinkSession,
    p_tx_w: f64,
    carrier_hz: f64,
    noise_variance_w: f64,
    distance_m: f64,
    n_antennas: usize,
    out_per_antenna: *mut f64,
    out_array_gain_db: *mut f64,
) -> i32 {
    guarded(session, |session| {
        if out_per_antenna.is_null() || out_array_gain_db.is_null() {
            return session.fail(DSKLINK_ERR_NULL_POINTER, "an output pointer is null");
        }
        if let Err(message) = finite_or_message(&[
            ("p_tx_w", p_tx_w),
            ("carrier_hz", carrier_hz),
            ("noise_variance_w", noise_variance_w),
            ("distance_m", distance_m),
        ]) {
            return session.fail(DSKLINK_ERR_INVALID_ARGUMENT, message);
        }
        let budget = match LinkBudget::new(p_tx_w, carrier_hz, noise_variance_w) {
            Ok(budget) => budget,
            Err(err) => return session.fail(DSKLINK_ERR_INVALID_ARGUMENT, err.to_string()),
        };
        match snr(&budget, distance_m, n_antennas) {
            Ok(report) => {
                *out_per_antenna = report.per_antenna;
                *out_array_gain_db = report.array_gain_db;
                session.ok()
            }
            Err(err) => session.fail(DSKLINK_ERR_INVALID_ARGUMENT, err.to_string()),
        }
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
