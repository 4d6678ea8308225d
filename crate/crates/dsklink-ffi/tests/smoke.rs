//! End-to-end exercise of the C ABI: every exported function is called the
//! way a C program would call it, and the numerical answers are pinned to
//! the same frozen values the core library's golden tests use.

// The golden constants keep every digit of the source computation.
#![allow(clippy::excessive_precision)]

use core::ffi::c_char;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use dsklink_ffi::*;

/// Reads the session's last error into a Rust string.
fn last_error(session: *const DsklinkSession) -> String {
    unsafe {
        let len = dsklink_session_last_error(session, std::ptr::null_mut(), 0);
        let mut buf = vec![0 as c_char; len + 1];
        dsklink_session_last_error(session, buf.as_mut_ptr(), buf.len());
        String::from_utf8(buf[..len].iter().map(|&b| b as u8).collect()).unwrap()
    }
}

#[test]
fn bessel_kernel_matches_frozen_points() {
    assert_eq!(dsklink_j0(0.0), 1.0);
    // First positive root.
    assert!(dsklink_j0(2.404825557695773).abs() <= 1e-15);
    // Fixed offset from the 1/sqrt(2) crossing.
    assert!((dsklink_j0(1.125) - FRAC_1_SQRT_2 - 6.524809458e-4).abs() <= 1e-12);
    assert!(dsklink_j0(f64::NAN).is_nan());
}

#[test]
fn coherence_values_match_the_library_goldens() {
    let session = dsklink_session_new();
    unsafe {
        // Symmetric two-element geometry: 30 km/h, 100 m range, 100 MHz,
        // 5 cm radii on opposite sides, heading 45 degrees, 2 s elapsed.
        let mut exact = 0.0;
        let code = dsklink_j_dct_exact(
            session,
            2.0,
            30.0 / 3.6,
            100.0,
            1e8,
            0.05,
            0.05,
            0.0,
            PI,
            FRAC_PI_4,
            &mut exact,
        );
        assert_eq!(code, DSKLINK_OK, "{}", last_error(session));
        assert!((exact - 0.999987240799393722).abs() <= 1e-9 * exact);

        // The closed-form bound at the same point, and the ordering.
        let mut bound = 0.0;
        let code = dsklink_j_dct_bound(
            session,
            2.0,
            30.0 / 3.6,
            100.0,
            1e8,
            0.05,
            0.05,
            0.0,
            PI,
            FRAC_PI_4,
            &mut bound,
        );
        assert_eq!(code, DSKLINK_OK);
        assert!((bound - 0.999923847094912499).abs() <= 1e-12);
        assert!(bound <= exact);

        // Conventional clock with no oscillator offset stays near 1 at
        // microsecond scale.
        let mut cct = 0.0;
        let mut clipped = true;
        let code = dsklink_j_cct(
            session,
            1e-6,
            30.0 / 3.6,
            0.01,
            1e8,
            0.0,
            0.0,
            &mut cct,
            &mut clipped,
        );
        assert_eq!(code, DSKLINK_OK);
        assert!(cct > 0.99999 && cct <= 1.0);
        assert!(!clipped);
    }
    unsafe { dsklink_session_free(session) };
}

#[test]
fn coherence_times_match_the_frozen_crossings() {
    let session = dsklink_session_new();
    unsafe {
        // Carrier clock at 100 km/h and a 1 cm wavelength.
        let mut t_cct = 0.0;
        let code = dsklink_cct_coherence_time(
            session,
            100.0 / 3.6,
            0.01,
            1e8,
            0.0,
            0.0,
            FRAC_1_SQRT_2,
            1e-2,
            &mut t_cct,
        );
        assert_eq!(code, DSKLINK_OK, "{}", last_error(session));
        let expected = 6.4535917110780102074e-5;
        assert!((t_cct - expected).abs() <= 1e-6 * expected);

        // Distributed bound clock for 10 cm elements at 30 km/h: the
        // crossing sits far past the fly-by horizon d/v = 12 s, which is
        // exactly why this entry point uses the analytic envelope.
        let mut t_dct = 0.0;
        let code = dsklink_dct_bound_coherence_time(
            session,
            30.0 / 3.6,
            100.0,
            1e8,
            0.1,
            FRAC_1_SQRT_2,
            200.0,
            &mut t_dct,
        );
        assert_eq!(code, DSKLINK_OK, "{}", last_error(session));
        let expected = 6.45359171107801e1;
        assert!((t_dct - expected).abs() <= 1e-6 * expected);
    }
    unsafe { dsklink_session_free(session) };
}

#[test]
fn snr_budget_matches_the_frozen_arithmetic() {
    let session = dsklink_session_new();
    unsafe {
        // 5 dBm at 30 GHz over 50 m, five antennas, 1e-12 W noise floor.
        let mut per_antenna = 0.0;
        let mut gain_db = 0.0;
        let code = dsklink_snr(
            session,
            10f64.powf(-2.5),
            30e9,
            1e-12,
            50.0,
            5,
            &mut per_antenna,
            &mut gain_db,
        );
        assert_eq!(code, DSKLINK_OK, "{}", last_error(session));
        assert!((per_antenna - 0.801014288835).abs() <= 1e-9);
        assert!((gain_db - 10.0 * 5f64.log10()).abs() <= 1e-12);

        // Zero antennas is an argument error, not a crash.
        let code = dsklink_snr(
            session,
            10f64.powf(-2.5),
            30e9,
            1e-12,
            50.0,
            0,
            &mut per_antenna,
            &mut gain_db,
        );
        assert_eq!(code, DSKLINK_ERR_INVALID_ARGUMENT);
        assert!(last_error(session).contains("antenna"));
    }
    unsafe { dsklink_session_free(session) };
}

#[test]
fn error_codes_distinguish_domain_numeric_and_null() {
    let session = dsklink_session_new();
    unsafe {
        let mut value = 0.0;

        // Displacement past the transmitter distance: domain error.
        let code = dsklink_j_dct_exact(
            session,
            20.0,
            30.0 / 3.6,
            100.0,
            1e8,
            0.05,
            0.05,
            0.0,
            PI,
            FRAC_PI_4,
            &mut value,
        );
        assert_eq!(code, DSKLINK_ERR_INVALID_ARGUMENT);
        assert!(last_error(session).contains("regime"));

        // Unequal radii break the closed-form bound: domain error.
        let code = dsklink_j_dct_bound(
            session,
            1.0,
            30.0 / 3.6,
            100.0,
            1e8,
            0.05,
            0.07,
            0.0,
            PI,
            FRAC_PI_4,
            &mut value,
        );
        assert_eq!(code, DSKLINK_ERR_INVALID_ARGUMENT);
        assert!(last_error(session).contains("l1"));

        // A horizon too short to reach the threshold: numeric error.
        let code = dsklink_cct_coherence_time(
            session,
            100.0 / 3.6,
            0.01,
            1e8,
            0.0,
            0.0,
            FRAC_1_SQRT_2,
            1e-9,
            &mut value,
        );
        assert_eq!(code, DSKLINK_ERR_NUMERIC);
        assert!(last_error(session).contains("crossing"));

        // Null session and null output pointers.
        let code = dsklink_j_cct(
            std::ptr::null_mut(),
            1e-6,
            8.0,
            0.01,
            1e8,
            0.0,
            0.0,
            &mut value,
            std::ptr::null_mut(),
        );
        assert_eq!(code, DSKLINK_ERR_NULL_POINTER);
        let code = dsklink_snr(
            session,
            1e-3,
            30e9,
            1e-12,
            50.0,
            5,
            std::ptr::null_mut(),
            std::ptr::null_mut(),
        );
        assert_eq!(code, DSKLINK_ERR_NULL_POINTER);
    }
    unsafe { dsklink_session_free(session) };
}

#[test]
fn quadrature_settings_are_validated_and_applied() {
    let session = dsklink_session_new();
    unsafe {
        // Too few nodes is rejected and explained.
        let code = dsklink_session_set_quadrature(session, 8, 1e-10);
        assert_eq!(code, DSKLINK_ERR_INVALID_ARGUMENT);
        assert!(!last_error(session).is_empty());

        // A tighter valid spec still reproduces the golden value.
        assert_eq!(dsklink_session_set_quadrature(session, 64, 1e-12), DSKLINK_OK);
        let mut exact = 0.0;
        let code = dsklink_j_dct_exact(
            session,
            5.0,
            30.0 / 3.6,
            100.0,
            1e8,
            0.05,
            0.05,
            0.0,
            PI,
            FRAC_PI_4,
            &mut exact,
        );
        assert_eq!(code, DSKLINK_OK, "{}", last_error(session));
        assert!((exact - 0.999917887039024724).abs() <= 1e-9 * exact);
    }
    unsafe { dsklink_session_free(session) };
}

#[test]
fn generated_header_exports_the_full_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("dsklink.h");
    let text = std::fs::read_to_string(&header)
        .expect("the build script writes include/dsklink.h on every compile");
    for needle in [
        "#define DSKLINK_OK 0",
        "#define DSKLINK_ERR_INVALID_ARGUMENT 1",
        "#define DSKLINK_ERR_NUMERIC 2",
        "#define DSKLINK_ERR_NULL_POINTER 3",
        "typedef struct DsklinkSession DsklinkSession;",
        "dsklink_session_new",
        "dsklink_session_free",
        "dsklink_session_set_quadrature",
        "dsklink_session_last_error",
        "dsklink_j0",
        "dsklink_j_cct",
        "dsklink_j_dct_exact",
        "dsklink_j_dct_bound",
        "dsklink_cct_coherence_time",
        "dsklink_dct_bound_coherence_time",
        "dsklink_snr",
    ] {
        assert!(text.contains(needle), "header is missing `{needle}`");
    }
}
