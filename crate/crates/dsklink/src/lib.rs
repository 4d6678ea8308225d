//! Link-level simulator and numerical toolkit for direction-shift keying
//! (DSK) over spatially distributed mmWave transmit antennas.
//!
//! In DSK the information is carried by *which* transmit antenna fires, and
//! the receiver identifies it from the time-difference-of-arrival (TDoA)
//! signature across its own small antenna array rather than from channel
//! coefficients. That signature is a pure geometric quantity, so it survives
//! oscillator phase noise and channel decorrelation that break coherent
//! schemes such as space-shift keying (SSK).
//!
//! The crate provides:
//!
//! - [`geometry`]: exact 2-D propagation geometry (ToA/TDoA fingerprints,
//!   mirror images, mobility displacement).
//! - [`waveform`]: the ideal sinc pulse, its closed-form correlation kernel,
//!   and sampled-grid synthesis for oracle cross-checks.
//! - [`impairments`]: Wiener common-phase-error, per-block frequency offsets,
//!   AWGN, and the free-space link budget.
//! - [`detection`]: the optimal TDoA-weighted correlation detector, its
//!   magnitude variant, pilot-aided reference estimation, and the SSK
//!   baseline.
//! - [`coherence`]: channel vs direction coherence functions, the exact
//!   direction-coherence integral with singularity-aware quadrature, its
//!   closed-form lower bound, and coherence-time solvers.
//! - [`scenarios`]: circular-cell and highway roadside-unit experiments with
//!   a deterministic, parallel Monte Carlo symbol-error-rate engine.
//! - [`config`] and [`cli`]: TOML experiment configuration, presets, CSV
//!   output, and a self-check suite.

// Frozen reference constants deliberately keep every digit of the source
// computation, and validation guards are written `!(x > 0.0)` so that NaN
// fails them; both idioms are intentional crate-wide.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coherence;
pub mod config;
pub mod detection;
pub mod geometry;
pub mod impairments;
pub mod numerics;
pub mod scenarios;
pub mod seed;
pub mod waveform;

/// Propagation speed used throughout, in meters per second.
///
/// The conventional radio-engineering value 3e8 keeps derived quantities
/// (wavelengths, delay budgets, coherence ratios) at their textbook values;
/// every geometric operation still takes the speed as an explicit argument,
/// so a caller can substitute the exact SI constant.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
