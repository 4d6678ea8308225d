//! Experiment configuration: strict structured-text parsing, defaults
//! matching the reference operating points, and a canonical content hash.
//!
//! A configuration file is TOML with one table per scenario family plus a
//! sweep table and top-level run controls. Every field has a default, so
//! an empty file is a complete, valid configuration (the circular cell at
//! its standard operating point). Unknown keys are rejected rather than
//! ignored: a typo must fail loudly, not silently fall back to a default.
//!
//! The canonical hash is FNV-1a over the canonical serialization of the
//! fully resolved configuration, so any effective change (including seed
//! overrides from the command line) changes the hash stored in result
//! rows.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::coherence::CoherenceQuery;
use crate::impairments::dbm_to_watts;
use crate::scenarios::{
    build_circular_cell, build_rsu, CircularCellConfig, RsuConfig, SweepVariable,
};
use crate::seed::Fnv1a;
use crate::SPEED_OF_LIGHT;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Reasons a configuration cannot be loaded or used.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// The file could not be read.
    #[error("cannot read config {path}: {source}")]
    Read {
        /// Offending path.
        path: String,
        /// Underlying IO error.
        #[source]
        source: std::io::Error,
    },
    /// The text is not valid TOML for this schema (includes unknown keys;
    /// the parser's message carries line and key diagnostics).
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    /// A value failed validation after parsing.
    #[error("invalid [{section}] configuration: {reason}")]
    Invalid {
        /// Config table at fault.
        section: &'static str,
        /// Human-readable reason.
        reason: String,
    },
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

/// Which experiment family a run drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Transmitters on a ring, receiver dropped in the disk.
    Circular,
    /// Roadside-unit corridor drive.
    Rsu,
    /// Coherence-curve evaluation (no Monte Carlo).
    Coherence,
}

/// Complete experiment description: run controls, sweep, and one table of
/// parameters per scenario family (all present, defaults applied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Scenario family to run.
    pub scenario: ScenarioKind,
    /// Monte Carlo trials per sweep point (data symbols for the corridor).
    pub trials: u64,
    /// Master seed for all derived random streams.
    pub seed: u64,
    /// Output directory for CSV and meta files.
    pub out: String,
    /// Worker threads (0 = automatic).
    pub workers: usize,
    /// Sweep settings.
    pub sweep: SweepSection,
    /// Circular-cell parameters.
    pub circular: CircularSection,
    /// Corridor parameters.
    pub rsu: RsuSection,
    /// Coherence-curve parameters.
    pub coherence: CoherenceSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Circular,
            trials: 10_000,
            seed: 1,
            out: "results".to_string(),
            workers: 0,
            sweep: SweepSection::default(),
            circular: CircularSection::default(),
            rsu: RsuSection::default(),
            coherence: CoherenceSection::default(),
        }
    }
}

/// What to sweep and over which grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Variable name; the allowed set depends on the scenario:
    /// circular accepts `snr_db`, `elapsed_time`, `sigma_df`; the corridor
    /// accepts `update_period`, `rsu_spacing`, `sigma_df`.
    pub variable: String,
    /// Grid values, in run order.
    pub grid: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            variable: "snr_db".to_string(),
            grid: vec![6.0, 8.0, 10.0, 12.0, 14.0],
        }
    }
}

/// Circular-cell table; mirrors the engine configuration field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircularSection {
    /// Cell radius in meters.
    pub cell_radius: f64,
    /// Transmitter alphabet size (power of two). Accepts the short key
    /// `M` as an alias.
    #[serde(alias = "M")]
    pub m_count: usize,
    /// Receive antennas on the receiver's circle.
    pub n_antennas: usize,
    /// Receive-array radius in meters.
    pub array_radius: f64,
    /// Carrier frequency in hertz.
    pub carrier: f64,
    /// Signal bandwidth in hertz.
    pub bandwidth: f64,
    /// Receiver speed in meters per second.
    pub speed: f64,
    /// Array-combined SNR in dB.
    pub snr_db: f64,
    /// Seconds between reference estimation and the scored symbol.
    pub elapsed_time: f64,
    /// Oscillator frequency-offset spread in hertz.
    pub sigma_df: f64,
    /// Correlation window half-width in critical-rate taps.
    pub window_half_width: usize,
    /// Minimum receiver-transmitter clearance in meters.
    pub min_clearance: f64,
}

impl Default for CircularSection {
    fn default() -> Self {
        let d = CircularCellConfig::default();
        Self {
            cell_radius: d.cell_radius,
            m_count: d.m_count,
            n_antennas: d.n_antennas,
            array_radius: d.array_radius,
            carrier: d.carrier,
            bandwidth: d.bandwidth,
            speed: d.speed,
            snr_db: d.snr_db,
            elapsed_time: d.elapsed_time,
            sigma_df: d.sigma_df,
            window_half_width: d.window_half_width,
            min_clearance: d.min_clearance,
        }
    }
}

impl CircularSection {
    /// Engine configuration equivalent of this table.
    pub fn to_engine(&self) -> CircularCellConfig {
        CircularCellConfig {
            cell_radius: self.cell_radius,
            m_count: self.m_count,
            n_antennas: self.n_antennas,
            array_radius: self.array_radius,
            carrier: self.carrier,
            bandwidth: self.bandwidth,
            speed: self.speed,
            snr_db: self.snr_db,
            elapsed_time: self.elapsed_time,
            sigma_df: self.sigma_df,
            window_half_width: self.window_half_width,
            min_clearance: self.min_clearance,
        }
    }
}

/// Corridor table; transmit power is configured in dBm (the engine takes
/// watts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RsuSection {
    /// Distance between consecutive units, meters.
    pub rsu_spacing: f64,
    /// Perpendicular unit offset from the centerline, meters.
    pub lateral_offset: f64,
    /// Vehicle array elements.
    pub n_antennas: usize,
    /// Carrier frequency in hertz.
    pub carrier: f64,
    /// Pilot symbols per alphabet member per reference block.
    pub pilots_per_tx: usize,
    /// Symbol period in seconds.
    pub symbol_period: f64,
    /// Target reference refresh period in seconds.
    pub update_period: f64,
    /// Transmit power in dBm.
    pub p_tx_dbm: f64,
    /// Receiver noise power per antenna sample, watts.
    pub sigma2: f64,
    /// Oscillator linewidth spread in hertz.
    pub sigma_df: f64,
    /// Vehicle speed, meters per second.
    pub vehicle_speed: f64,
    /// Vehicle road position at drive start, meters.
    pub start_x: f64,
    /// Array rotation relative to the road axis, radians.
    pub array_angle: f64,
}

impl Default for RsuSection {
    fn default() -> Self {
        let d = RsuConfig::default();
        Self {
            rsu_spacing: d.rsu_spacing,
            lateral_offset: d.lateral_offset,
            n_antennas: d.n_antennas,
            carrier: d.carrier,
            pilots_per_tx: d.pilots_per_tx,
            symbol_period: d.symbol_period,
            update_period: d.update_period,
            p_tx_dbm: 12.0,
            sigma2: d.sigma2,
            sigma_df: d.sigma_df,
            vehicle_speed: d.vehicle_speed,
            start_x: d.start_x,
            array_angle: d.array_angle,
        }
    }
}

impl RsuSection {
    /// Engine configuration equivalent of this table.
    pub fn to_engine(&self) -> RsuConfig {
        RsuConfig {
            rsu_spacing: self.rsu_spacing,
            lateral_offset: self.lateral_offset,
            n_antennas: self.n_antennas,
            carrier: self.carrier,
            pilots_per_tx: self.pilots_per_tx,
            symbol_period: self.symbol_period,
            update_period: self.update_period,
            p_tx: dbm_to_watts(self.p_tx_dbm),
            sigma2: self.sigma2,
            sigma_df: self.sigma_df,
            vehicle_speed: self.vehicle_speed,
            start_x: self.start_x,
            array_angle: self.array_angle,
        }
    }
}

/// Coherence-curve table: the two-element geometry and a logarithmic
/// elapsed-time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceSection {
    /// Receiver speed, meters per second.
    pub speed: f64,
    /// Carrier frequency in hertz.
    pub carrier: f64,
    /// Signal bandwidth in hertz.
    pub bandwidth: f64,
    /// Transmitter distance in meters.
    pub distance: f64,
    /// First element radius in meters.
    pub l1: f64,
    /// Second element radius in meters.
    pub l2: f64,
    /// First element angle in radians.
    pub phi1: f64,
    /// Second element angle in radians.
    pub phi2: f64,
    /// Arrival angle in radians.
    pub theta: f64,
    /// Residual frequency offset before displacement, hertz.
    pub df: f64,
    /// Residual frequency offset after displacement, hertz.
    pub df_prime: f64,
    /// Smallest elapsed time on the grid, seconds.
    pub t_min: f64,
    /// Largest elapsed time on the grid, seconds.
    pub t_max: f64,
    /// Grid points (logarithmically spaced).
    pub points: usize,
}

impl Default for CoherenceSection {
    fn default() -> Self {
        Self {
            speed: 30.0 / 3.6,
            carrier: 30e9,
            bandwidth: 100e6,
            distance: 100.0,
            l1: 0.05,
            l2: 0.05,
            phi1: 0.0,
            phi2: PI,
            theta: PI / 4.0,
            df: 0.0,
            df_prime: 0.0,
            t_min: 0.1,
            t_max: 10.0,
            points: 25,
        }
    }
}

impl CoherenceSection {
    /// Query at elapsed time `t_c` for this geometry.
    pub fn query_at(&self, t_c: f64) -> CoherenceQuery {
        CoherenceQuery {
            t_c,
            speed: self.speed,
            d: self.distance,
            lambda: SPEED_OF_LIGHT / self.carrier,
            bandwidth: self.bandwidth,
            l1: self.l1,
            l2: self.l2,
            phi1: self.phi1,
            phi2: self.phi2,
            theta: self.theta,
            df: self.df,
            df_prime: self.df_prime,
        }
    }

    /// The logarithmic elapsed-time grid.
    pub fn t_grid(&self) -> Vec<f64> {
        let n = self.points.max(2);
        let ratio = self.t_max / self.t_min;
        (0..n)
            .map(|i| self.t_min * ratio.powf(i as f64 / (n - 1) as f64))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Parsing, validation, hashing
// ---------------------------------------------------------------------------

impl ExperimentConfig {
    /// Parses configuration text, applies defaults, and validates. An
    /// empty string yields the default configuration.
    pub fn from_str_validated(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical serialization (stable field order), the hash input.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// FNV-1a hash of the canonical serialization with the execution-only
    /// fields (output destination, worker count) pinned to defaults. Any
    /// result-determining change, including a seed override, changes the
    /// hash; rerunning the same experiment into another directory or with a
    /// different thread count does not.
    pub fn config_hash(&self) -> u64 {
        let mut fingerprint = self.clone();
        fingerprint.out = Self::default().out;
        fingerprint.workers = 0;
        let mut h = Fnv1a::new();
        h.write(fingerprint.canonical_toml().as_bytes());
        h.finish()
    }

    /// Validates every table (not only the selected scenario's), so a bad
    /// value cannot hide behind the scenario switch.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::Invalid {
                section: "top level",
                reason: "trials must be at least 1".to_string(),
            });
        }
        build_circular_cell(self.circular.to_engine()).map_err(|e| ConfigError::Invalid {
            section: "circular",
            reason: e.to_string(),
        })?;
        build_rsu(self.rsu.to_engine()).map_err(|e| ConfigError::Invalid {
            section: "rsu",
            reason: e.to_string(),
        })?;

        let c = &self.coherence;
        for (name, value) in [
            ("carrier", c.carrier),
            ("bandwidth", c.bandwidth),
            ("distance", c.distance),
            ("l1", c.l1),
            ("l2", c.l2),
            ("t_min", c.t_min),
            ("t_max", c.t_max),
        ] {
            if !(value > 0.0) {
                return Err(ConfigError::Invalid {
                    section: "coherence",
                    reason: format!("{name} must be positive, got {value}"),
                });
            }
        }
        if !(c.speed >= 0.0) {
            return Err(ConfigError::Invalid {
                section: "coherence",
                reason: format!("speed must be nonnegative, got {}", c.speed),
            });
        }
        if c.t_max <= c.t_min {
            return Err(ConfigError::Invalid {
                section: "coherence",
                reason: format!("t_max ({}) must exceed t_min ({})", c.t_max, c.t_min),
            });
        }
        if c.points < 2 {
            return Err(ConfigError::Invalid {
                section: "coherence",
                reason: format!("points must be at least 2, got {}", c.points),
            });
        }
        if c.speed > 0.0 && c.t_max * c.speed >= c.distance {
            return Err(ConfigError::Invalid {
                section: "coherence",
                reason: format!(
                    "grid leaves the directional regime: t_max * speed = {} m \
                     reaches the transmitter distance {} m",
                    c.t_max * c.speed,
                    c.distance
                ),
            });
        }

        match self.scenario {
            ScenarioKind::Circular => {
                self.circular_sweep_variable()?;
            }
            ScenarioKind::Rsu => {
                self.rsu_sweep_variable()?;
            }
            ScenarioKind::Coherence => {}
        }
        if self.sweep.grid.is_empty() {
            return Err(ConfigError::Invalid {
                section: "sweep",
                reason: "grid is empty".to_string(),
            });
        }
        Ok(())
    }

    /// The circular-cell sweep variable named by the sweep table.
    pub fn circular_sweep_variable(&self) -> Result<SweepVariable, ConfigError> {
        match self.sweep.variable.as_str() {
            "snr_db" => Ok(SweepVariable::SnrDb),
            "elapsed_time" => Ok(SweepVariable::ElapsedTime),
            "sigma_df" => Ok(SweepVariable::PhaseNoiseStd),
            other => Err(ConfigError::Invalid {
                section: "sweep",
                reason: format!(
                    "unknown circular sweep variable {other:?}; \
                     expected snr_db, elapsed_time, or sigma_df"
                ),
            }),
        }
    }

    /// The corridor sweep variable named by the sweep table.
    pub fn rsu_sweep_variable(&self) -> Result<RsuSweepVariable, ConfigError> {
        match self.sweep.variable.as_str() {
            "update_period" => Ok(RsuSweepVariable::UpdatePeriod),
            "rsu_spacing" => Ok(RsuSweepVariable::Spacing),
            "sigma_df" => Ok(RsuSweepVariable::PhaseNoiseStd),
            other => Err(ConfigError::Invalid {
                section: "sweep",
                reason: format!(
                    "unknown corridor sweep variable {other:?}; \
                     expected update_period, rsu_spacing, or sigma_df"
                ),
            }),
        }
    }
}

/// Which corridor parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsuSweepVariable {
    /// Reference refresh period in seconds.
    UpdatePeriod,
    /// Unit spacing in meters.
    Spacing,
    /// Oscillator linewidth spread in hertz.
    PhaseNoiseStd,
}

impl RsuSweepVariable {
    /// The engine configuration with this variable set to `value`.
    pub fn apply(&self, config: &RsuConfig, value: f64) -> RsuConfig {
        let mut c = config.clone();
        match self {
            RsuSweepVariable::UpdatePeriod => c.update_period = value,
            RsuSweepVariable::Spacing => c.rsu_spacing = value,
            RsuSweepVariable::PhaseNoiseStd => c.sigma_df = value,
        }
        c
    }
}

/// Loads and validates a configuration file. A missing `path` (None)
/// yields the defaults.
pub fn parse_config(path: Option<&Path>) -> Result<ExperimentConfig, ConfigError> {
    match path {
        None => {
            let config = ExperimentConfig::default();
            config.validate()?;
            Ok(config)
        }
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                path: p.display().to_string(),
                source,
            })?;
            ExperimentConfig::from_str_validated(&text)
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
