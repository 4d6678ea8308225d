//! Roadside-unit corridor drive: a vehicle on the road centerline signals
//! by activating one of the two nearest roadside units each symbol.
//!
//! Units sit at regular intervals along the road with a fixed lateral
//! offset; the vehicle carries a uniform linear array. The alphabet at
//! position `x` is {nearest unit, second-nearest unit}, which changes
//! when the vehicle passes a unit. The drive is narrowband: one complex
//! sample per antenna per symbol, free-space amplitude and carrier phase
//! from the exact unit-to-element distances, plus a common oscillator
//! phase following a random walk and white receiver noise.
//!
//! References come from pilot blocks: `pilots_per_tx` symbols per
//! alphabet member, sent at drive start, at every alphabet change, and
//! whenever `u_symbols()` data symbols have passed since the last block.
//! The averaged pilots give the baseline's channel vectors and the
//! weighted detector's phase-ratio features; geometry and oscillator
//! phase keep evolving during pilots, so reference staleness is physical.
//!
//! Two derived random streams keep impairments separable: the data
//! stream (symbol choices, receiver noise, erasure resolution) and the
//! phase stream (oscillator walk). Changing the phase seed must not
//! perturb the data stream, which is what lets tests show the feature
//! detector is untouched by oscillator drift while the baseline is not.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use crate::detection::{
    dsk_detect_feature, estimate_csi_reference, estimate_phase_feature, ssk_detect, CsiReference,
    DetectionError, PhaseFeature,
};
use crate::geometry::{MdArray, Point2D};
use crate::impairments::{awgn_vec, dbm_to_watts, free_space_gain, WienerPhase};
use crate::seed::{derive_stream, Fnv1a};
use crate::SPEED_OF_LIGHT;

use super::{detector_stats, DetectorStats, ScenarioError};

/// Stream-domain label separating corridor draws from other engines.
const RSU_STREAM: u64 = 0x7273_755f_6472_6976;
/// Sub-stream for symbol choices, receiver noise, and erasure picks.
const DATA_DOMAIN: u64 = 0;
/// Sub-stream for the oscillator phase walk.
const PHASE_DOMAIN: u64 = 1;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Roadside corridor: units every `rsu_spacing` meters at `lateral_offset`
/// from the centerline, a vehicle driving along `y = 0` from `start_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RsuConfig {
    /// Distance between consecutive units along the road, meters.
    pub rsu_spacing: f64,
    /// Perpendicular unit offset from the centerline, meters.
    pub lateral_offset: f64,
    /// Vehicle array elements (uniform linear array, half-wavelength
    /// spacing).
    pub n_antennas: usize,
    /// Carrier frequency in hertz.
    pub carrier: f64,
    /// Pilot symbols per alphabet member in one reference block.
    pub pilots_per_tx: usize,
    /// Symbol period in seconds.
    pub symbol_period: f64,
    /// Target reference refresh period in seconds; the refresh interval in
    /// symbols is `ceil(update_period / symbol_period)`, at least 1.
    pub update_period: f64,
    /// Transmit power in watts.
    pub p_tx: f64,
    /// Receiver noise power per antenna sample, watts.
    pub sigma2: f64,
    /// Oscillator linewidth spread in hertz driving the phase walk.
    pub sigma_df: f64,
    /// Vehicle speed along the road, meters per second.
    pub vehicle_speed: f64,
    /// Vehicle position on the road axis at drive start, meters.
    pub start_x: f64,
    /// Array boresight rotation relative to the road axis, radians. An
    /// off-axis angle keeps the two units' mirror bearings from aliasing
    /// on the linear array.
    pub array_angle: f64,
}

impl Default for RsuConfig {
    fn default() -> Self {
        Self {
            rsu_spacing: 100.0,
            lateral_offset: 10.0,
            n_antennas: 5,
            carrier: 30e9,
            pilots_per_tx: 4,
            symbol_period: 1e-6,
            update_period: 1e-5,
            p_tx: dbm_to_watts(12.0),
            sigma2: 1e-12,
            sigma_df: 0.0,
            vehicle_speed: 30.0,
            start_x: 35.0,
            array_angle: PI / 4.0,
        }
    }
}

/// A validated corridor scenario.
#[derive(Debug, Clone)]
pub struct RsuScenario {
    /// Validated configuration.
    pub config: RsuConfig,
}

/// Builds and validates the corridor.
pub fn build_rsu(config: RsuConfig) -> Result<RsuScenario, ScenarioError> {
    for (name, value) in [
        ("rsu_spacing", config.rsu_spacing),
        ("lateral_offset", config.lateral_offset),
        ("carrier", config.carrier),
        ("symbol_period", config.symbol_period),
        ("update_period", config.update_period),
        ("p_tx", config.p_tx),
        ("n_antennas", config.n_antennas as f64),
        ("pilots_per_tx", config.pilots_per_tx as f64),
    ] {
        if !(value > 0.0) {
            return Err(ScenarioError::NonpositiveParameter { name, value });
        }
    }
    for (name, value) in [
        ("sigma2", config.sigma2),
        ("sigma_df", config.sigma_df),
        ("vehicle_speed", config.vehicle_speed),
    ] {
        if !(value >= 0.0) {
            return Err(ScenarioError::NonpositiveParameter { name, value });
        }
    }
    if config.n_antennas < 2 {
        return Err(ScenarioError::NonpositiveParameter {
            name: "n_antennas (needs >= 2)",
            value: config.n_antennas as f64,
        });
    }
    Ok(RsuScenario { config })
}

impl RsuScenario {
    /// Carrier wavelength in meters.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.config.carrier
    }

    /// Reference refresh interval in data symbols. The quotient is nudged
    /// before rounding up so that division jitter on an exact multiple
    /// (for example `1e-5 / 1e-6`) cannot add a spurious symbol.
    pub fn u_symbols(&self) -> u64 {
        let ratio = self.config.update_period / self.config.symbol_period;
        ((ratio - 1e-9).ceil() as u64).max(1)
    }

    /// Position of unit `k`.
    pub fn rsu_position(&self, k: i64) -> Point2D {
        Point2D::new(k as f64 * self.config.rsu_spacing, self.config.lateral_offset)
    }

    /// The two-unit alphabet at road position `x`: nearest unit and
    /// second-nearest, sorted by unit index. The pair changes when the
    /// vehicle passes a unit's road coordinate.
    pub fn alphabet_at(&self, x: f64) -> [i64; 2] {
        let nearest = (x / self.config.rsu_spacing).round() as i64;
        let partner = if x >= nearest as f64 * self.config.rsu_spacing {
            nearest + 1
        } else {
            nearest - 1
        };
        [nearest.min(partner), nearest.max(partner)]
    }

    /// Vehicle array at road position `x`.
    pub fn array_at(&self, x: f64) -> Result<MdArray, ScenarioError> {
        Ok(MdArray::linear(
            Point2D::new(x, 0.0),
            self.config.n_antennas,
            0.5 * self.wavelength(),
            self.config.array_angle,
        )?)
    }

    /// Narrowband channel from unit `k` to the array at `x`: free-space
    /// amplitude and carrier phase per element.
    pub fn channel(&self, x: f64, k: i64) -> Result<Vec<Complex64>, ScenarioError> {
        let lambda = self.wavelength();
        let unit = self.rsu_position(k);
        let array = self.array_at(x)?;
        let amp_scale = self.config.p_tx.sqrt();
        (0..self.config.n_antennas)
            .map(|e| {
                let p = array.element_position(e);
                let d = (p.x - unit.x).hypot(p.y - unit.y);
                let amp = amp_scale * free_space_gain(d, lambda)?;
                Ok(Complex64::from_polar(amp, -2.0 * PI * d / lambda))
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Drive loop
// ---------------------------------------------------------------------------

/// Outcome of one corridor drive.
#[derive(Debug, Clone, PartialEq)]
pub struct RsuDriveReport {
    /// Weighted (feature) detector tally over data symbols.
    pub dsk: DetectorStats,
    /// Channel-matching baseline tally over data symbols.
    pub ssk: DetectorStats,
    /// Realized pilot overhead: pilot symbols over all symbols sent.
    pub overhead: f64,
    /// Data symbols scored.
    pub data_symbols: u64,
    /// Pilot symbols spent on references.
    pub pilot_symbols: u64,
    /// Data symbols whose feature was degenerate (scored as errors).
    pub erasures: u64,
    /// Pilot blocks whose feature estimate was degenerate for some member
    /// (the previous feature was kept).
    pub ref_failures: u64,
    /// Mean per-antenna SNR over data symbols and alphabet members, dB.
    pub mean_snr_db: f64,
    /// Digest of (sent, decided) pairs for the weighted detector.
    pub dsk_digest: u64,
    /// Digest of (sent, decided) pairs for the baseline.
    pub ssk_digest: u64,
}

/// State advanced one symbol at a time: position and oscillator phase move
/// during pilots and data alike.
struct DriveClock {
    x: f64,
    phase: WienerPhase,
    dx_per_symbol: f64,
}

impl DriveClock {
    /// Advances the oscillator by one symbol and returns its rotation; the
    /// position advances at symbol end via `step`.
    fn rotation<R: Rng + ?Sized>(&mut self, phase_rng: &mut R) -> Complex64 {
        Complex64::from_polar(1.0, self.phase.advance_with(phase_rng))
    }

    fn step(&mut self) {
        self.x += self.dx_per_symbol;
    }
}

/// Sends one pilot block (`pilots_per_tx` symbols per alphabet member) and
/// returns the averaged channel vectors plus per-member features (`None`
/// where the estimate was degenerate).
#[allow(clippy::too_many_arguments)]
fn pilot_block<R: Rng + ?Sized, P: Rng + ?Sized>(
    scenario: &RsuScenario,
    alphabet: [i64; 2],
    clock: &mut DriveClock,
    data_rng: &mut R,
    phase_rng: &mut P,
    pilot_symbols: &mut u64,
) -> Result<(CsiReference, Vec<Option<PhaseFeature>>), ScenarioError> {
    let cfg = &scenario.config;
    let mut vectors = Vec::with_capacity(2);
    let mut features = Vec::with_capacity(2);
    for &unit in &alphabet {
        let mut pilots = Vec::with_capacity(cfg.pilots_per_tx);
        for _ in 0..cfg.pilots_per_tx {
            let rot = clock.rotation(phase_rng);
            let h = scenario.channel(clock.x, unit)?;
            let noise = awgn_vec(cfg.sigma2, cfg.n_antennas, data_rng);
            let y: Vec<Complex64> = h
                .iter()
                .zip(&noise)
                .map(|(hv, w)| rot * hv + w)
                .collect();
            pilots.push(y);
            clock.step();
            *pilot_symbols += 1;
        }
        vectors.push(estimate_csi_reference(&pilots)?);
        features.push(match estimate_phase_feature(&pilots) {
            Ok(f) => Some(f),
            Err(DetectionError::DegenerateReference { .. }) => None,
            Err(e) => return Err(e.into()),
        });
    }
    Ok((CsiReference::new(vectors)?, features))
}

/// Drives the corridor for `data_symbols` scored symbols with separate
/// master seeds for the data and oscillator streams. The data stream (and
/// hence every symbol choice and noise draw) is untouched by the phase
/// seed.
pub fn run_rsu_drive_seeded(
    scenario: &RsuScenario,
    data_symbols: u64,
    data_seed: u64,
    phase_seed: u64,
) -> Result<RsuDriveReport, ScenarioError> {
    if data_symbols == 0 {
        return Err(ScenarioError::NoTrials);
    }
    let cfg = &scenario.config;
    let n = cfg.n_antennas;
    let u = scenario.u_symbols();
    let mut data_rng = derive_stream(data_seed, &[RSU_STREAM, DATA_DOMAIN]);
    let mut phase_rng = derive_stream(phase_seed, &[RSU_STREAM, PHASE_DOMAIN]);

    let mut clock = DriveClock {
        x: cfg.start_x,
        phase: WienerPhase::new(cfg.sigma_df, cfg.symbol_period),
        dx_per_symbol: cfg.vehicle_speed * cfg.symbol_period,
    };
    let placeholder = PhaseFeature::from_vector(&vec![Complex64::new(1.0, 0.0); n])
        .expect("uniform placeholder feature");
    let mut features = vec![placeholder.clone(), placeholder];
    let mut ref_failures = 0u64;
    let mut pilot_count = 0u64;

    let mut alphabet = scenario.alphabet_at(clock.x);
    let (mut csi, first_feats) = pilot_block(
        scenario,
        alphabet,
        &mut clock,
        &mut data_rng,
        &mut phase_rng,
        &mut pilot_count,
    )?;
    for (slot, f) in first_feats.into_iter().enumerate() {
        match f {
            Some(f) => features[slot] = f,
            None => ref_failures += 1,
        }
    }

    let mut since_refresh = 0u64;
    let mut dsk_errors = 0u64;
    let mut ssk_errors = 0u64;
    let mut erasures = 0u64;
    let mut dsk_digest = Fnv1a::new();
    let mut ssk_digest = Fnv1a::new();
    let mut snr_acc = 0.0f64;

    for _ in 0..data_symbols {
        let here = scenario.alphabet_at(clock.x);
        if here != alphabet || since_refresh >= u {
            alphabet = here;
            let (fresh_csi, fresh_feats) = pilot_block(
                scenario,
                alphabet,
                &mut clock,
                &mut data_rng,
                &mut phase_rng,
                &mut pilot_count,
            )?;
            csi = fresh_csi;
            for (slot, f) in fresh_feats.into_iter().enumerate() {
                match f {
                    Some(f) => features[slot] = f,
                    None => ref_failures += 1,
                }
            }
            since_refresh = 0;
        }

        let rot = clock.rotation(&mut phase_rng);
        let sent = data_rng.gen_range(0..2usize);
        let h0 = scenario.channel(clock.x, alphabet[0])?;
        let h1 = scenario.channel(clock.x, alphabet[1])?;
        let h = if sent == 0 { &h0 } else { &h1 };
        let noise = awgn_vec(cfg.sigma2, n, &mut data_rng);
        let y: Vec<Complex64> = h
            .iter()
            .zip(&noise)
            .map(|(hv, w)| rot * hv + w)
            .collect();

        let ssk = ssk_detect(&y, &csi)?;
        let feat = dsk_detect_feature(&y, &features, &mut data_rng)?;
        ssk_errors += u64::from(ssk != sent);
        dsk_errors += u64::from(feat.erasure || feat.index != sent);
        erasures += u64::from(feat.erasure);
        dsk_digest.write_u64(sent as u64);
        dsk_digest.write_u64(feat.index as u64);
        dsk_digest.write_u64(u64::from(feat.erasure));
        ssk_digest.write_u64(sent as u64);
        ssk_digest.write_u64(ssk as u64);

        if cfg.sigma2 > 0.0 {
            let power: f64 = h0.iter().chain(&h1).map(|v| v.norm_sqr()).sum();
            snr_acc += power / (2 * n) as f64 / cfg.sigma2;
        }

        clock.step();
        since_refresh += 1;
    }

    let total = data_symbols + pilot_count;
    let mean_snr_db = if cfg.sigma2 > 0.0 {
        10.0 * (snr_acc / data_symbols as f64).log10()
    } else {
        f64::INFINITY
    };
    Ok(RsuDriveReport {
        dsk: detector_stats(dsk_errors, data_symbols),
        ssk: detector_stats(ssk_errors, data_symbols),
        overhead: pilot_count as f64 / total as f64,
        data_symbols,
        pilot_symbols: pilot_count,
        erasures,
        ref_failures,
        mean_snr_db,
        dsk_digest: dsk_digest.finish(),
        ssk_digest: ssk_digest.finish(),
    })
}

/// Drives the corridor with one master seed for both streams.
pub fn run_rsu_drive(
    scenario: &RsuScenario,
    data_symbols: u64,
    seed: u64,
) -> Result<RsuDriveReport, ScenarioError> {
    run_rsu_drive_seeded(scenario, data_symbols, seed, seed)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
