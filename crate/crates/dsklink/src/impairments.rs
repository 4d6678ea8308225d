//! Oscillator phase noise, frequency offsets, additive noise, and the
//! free-space link budget.
//!
//! The common phase error of a free-running oscillator is modeled as a
//! Wiener (random-walk) process: once per symbol period the phase takes an
//! independent Gaussian increment with standard deviation
//! `2 PI sigma_df T_s`, where `sigma_df` is the oscillator linewidth spread
//! in hertz. The walk is unwrapped; nothing reduces it mod 2 PI. Residual
//! carrier-frequency offsets enter as a deterministic phase ramp and are
//! carried as a before/after pair for the coherence analysis.
//!
//! The budget side is standard free-space radio engineering: baseband
//! amplitude gain `lambda / (4 PI d)`, per-antenna SNR
//! `P_tx |gain|^2 / sigma^2`, and an `10 log10(N)` array gain in decibels
//! when N antennas combine coherently.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::SPEED_OF_LIGHT;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of the impairment and budget calculations.
#[derive(Debug, Error)]
pub enum ImpairmentsError {
    /// Path-gain distance must be strictly positive.
    #[error("distance must be positive, got {0} m")]
    NonpositiveDistance(f64),
    /// A link-budget field that must be strictly positive was not.
    #[error("link budget field {name} must be positive, got {value}")]
    NonpositiveBudget {
        /// Offending field.
        name: &'static str,
        /// Supplied value.
        value: f64,
    },
    /// SNR of an empty array requested.
    #[error("antenna count must be at least 1, got {0}")]
    NoAntennas(usize),
}

// ---------------------------------------------------------------------------
// Phase noise
// ---------------------------------------------------------------------------

/// Wiener (random-walk) common phase error of a free-running oscillator.
#[derive(Debug, Clone, Copy)]
pub struct WienerPhase {
    /// Oscillator linewidth spread in hertz (>= 0).
    pub sigma_df: f64,
    /// Symbol period in seconds, the walk's step interval.
    pub symbol_period: f64,
    /// Accumulated phase in radians, unwrapped.
    pub state: f64,
}

impl WienerPhase {
    /// A walk starting at zero phase.
    pub fn new(sigma_df: f64, symbol_period: f64) -> Self {
        Self {
            sigma_df,
            symbol_period,
            state: 0.0,
        }
    }

    /// Standard deviation of one phase increment, `2 PI sigma_df T_s` rad.
    pub fn increment_std(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.sigma_df * self.symbol_period
    }

    /// Advances the walk by one symbol using a supplied N(0,1) draw and
    /// returns the new phase.
    pub fn advance(&mut self, gaussian_draw: f64) -> f64 {
        self.state += self.increment_std() * gaussian_draw;
        self.state
    }

    /// Advances the walk by one symbol drawing from `rng`.
    pub fn advance_with<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let draw: f64 = rng.sample(StandardNormal);
        self.advance(draw)
    }
}

/// One Wiener step as a pure function: returns the walk with
/// `state += 2 PI sigma_df T_s * gaussian_draw`.
pub fn wiener_step(p: WienerPhase, gaussian_draw: f64) -> WienerPhase {
    let mut next = p;
    next.advance(gaussian_draw);
    next
}

/// Residual carrier-frequency offsets of one link before and after an
/// array displacement, in hertz.
///
/// The cross-coherence analysis needs both: the offset gap `|df - df_prime|`
/// must stay below the signal bandwidth for the band-overlap model to hold.
#[derive(Debug, Clone, Copy)]
pub struct FreqOffsetPair {
    /// Offset before displacement, hertz.
    pub df: f64,
    /// Offset after displacement, hertz.
    pub df_prime: f64,
}

impl FreqOffsetPair {
    /// Absolute offset gap `|df - df_prime|` in hertz.
    pub fn gap(&self) -> f64 {
        (self.df - self.df_prime).abs()
    }
}

// ---------------------------------------------------------------------------
// Link budget
// ---------------------------------------------------------------------------

/// Transmit power, carrier, wavelength, and noise floor of one link.
#[derive(Debug, Clone, Copy)]
pub struct LinkBudget {
    /// Transmit power in watts.
    pub p_tx: f64,
    /// Carrier frequency in hertz.
    pub f_c: f64,
    /// Carrier wavelength in meters (c / f_c).
    pub lambda: f64,
    /// Complex noise variance per sample in watts.
    pub noise_var: f64,
}

impl LinkBudget {
    /// A budget with the wavelength derived from the carrier.
    pub fn new(p_tx: f64, f_c: f64, noise_var: f64) -> Result<Self, ImpairmentsError> {
        Self::with_speed_of_light(p_tx, f_c, noise_var, SPEED_OF_LIGHT)
    }

    /// A budget with an explicit propagation speed (the self-check suite
    /// uses this to plant a wrong constant as a negative control).
    pub fn with_speed_of_light(
        p_tx: f64,
        f_c: f64,
        noise_var: f64,
        c: f64,
    ) -> Result<Self, ImpairmentsError> {
        for (name, value) in [
            ("p_tx", p_tx),
            ("f_c", f_c),
            ("noise_var", noise_var),
            ("propagation speed", c),
        ] {
            if !(value > 0.0) {
                return Err(ImpairmentsError::NonpositiveBudget { name, value });
            }
        }
        Ok(Self {
            p_tx,
            f_c,
            lambda: c / f_c,
            noise_var,
        })
    }
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Free-space baseband amplitude gain `lambda / (4 PI d)`.
pub fn free_space_gain(d: f64, lambda: f64) -> Result<f64, ImpairmentsError> {
    if !(d > 0.0) {
        return Err(ImpairmentsError::NonpositiveDistance(d));
    }
    Ok(lambda / (4.0 * std::f64::consts::PI * d))
}

/// Per-antenna and array SNR of a link at distance `d`.
#[derive(Debug, Clone, Copy)]
pub struct SnrReport {
    /// Per-antenna SNR, linear.
    pub per_antenna: f64,
    /// Coherent-combining array gain in decibels, `10 log10(N)`.
    pub array_gain_db: f64,
}

impl SnrReport {
    /// Per-antenna SNR in decibels.
    pub fn per_antenna_db(&self) -> f64 {
        10.0 * self.per_antenna.log10()
    }

    /// Array SNR in decibels: per-antenna dB plus the array gain.
    pub fn array_db(&self) -> f64 {
        self.per_antenna_db() + self.array_gain_db
    }
}

/// SNR budget at distance `d` meters for an `n_antennas`-element receiver:
/// per-antenna SNR `P_tx gain^2 / sigma^2`, array gain `10 log10(N)` dB.
pub fn snr(
    budget: &LinkBudget,
    d: f64,
    n_antennas: usize,
) -> Result<SnrReport, ImpairmentsError> {
    if n_antennas == 0 {
        return Err(ImpairmentsError::NoAntennas(n_antennas));
    }
    let gain = free_space_gain(d, budget.lambda)?;
    Ok(SnrReport {
        per_antenna: budget.p_tx * gain * gain / budget.noise_var,
        array_gain_db: 10.0 * (n_antennas as f64).log10(),
    })
}

// ---------------------------------------------------------------------------
// Additive noise
// ---------------------------------------------------------------------------

/// One circularly symmetric complex Gaussian sample CN(0, sigma2):
/// real and imaginary parts independent N(0, sigma2 / 2).
pub fn awgn<R: Rng + ?Sized>(sigma2: f64, rng: &mut R) -> Complex64 {
    let std = (0.5 * sigma2).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(std * re, std * im)
}

/// A vector of `n` independent CN(0, sigma2) samples.
pub fn awgn_vec<R: Rng + ?Sized>(sigma2: f64, n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| awgn(sigma2, rng)).collect()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
