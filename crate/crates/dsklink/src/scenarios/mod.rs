//! Scenario builders and the Monte Carlo symbol-error-rate engines.
//!
//! Two experiment families are modeled. The circular cell places the
//! transmitter alphabet uniformly on a 100 m circle, drops the mobile
//! receiver uniformly in the disk, and scores one symbol per trial after a
//! configurable elapsed time; references are taken noise-free at time zero,
//! so staleness comes from geometry displacement and oscillator drift
//! alone. The highway scenario drives a vehicle past road-side units,
//! re-estimating references from noisy pilots every update period, with a
//! Wiener common-phase error advancing every symbol.
//!
//! Both engines are deterministic for a fixed seed: every trial draws from
//! its own counter-derived random stream, and reductions run in trial
//! order, so results are independent of the worker-pool size.

use thiserror::Error;

pub mod circular;
pub mod rsu;

pub use circular::{
    build_circular_cell, run_circular_trials, run_ser_sweep, CircularCellConfig,
    CircularCellScenario, CircularTrialOutcome, SweepVariable,
};
pub use rsu::{build_rsu, run_rsu_drive, run_rsu_drive_seeded, RsuConfig, RsuDriveReport, RsuScenario};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of scenario construction and sweep execution.
#[derive(Debug, Error)]
pub enum ScenarioError {
    /// The transmitter alphabet must be a power of two to carry whole bits.
    #[error("transmitter count {0} is not a power of two (or is < 2)")]
    AlphabetNotPowerOfTwo(usize),
    /// A parameter that must be positive was not.
    #[error("{name} must be positive, got {value}")]
    NonpositiveParameter {
        /// Offending parameter.
        name: &'static str,
        /// Rejected value.
        value: f64,
    },
    /// A sweep was asked for with no grid points.
    #[error("sweep grid is empty")]
    EmptySweep,
    /// Trial counts must be at least one.
    #[error("trial count must be at least 1")]
    NoTrials,
    /// Detection plumbing failure inside the engine (internal consistency).
    #[error("detection failed inside the trial engine: {0}")]
    Detection(#[from] crate::detection::DetectionError),
    /// Geometry failure inside the engine (internal consistency).
    #[error("geometry failed inside the trial engine: {0}")]
    Geometry(#[from] crate::geometry::GeometryError),
    /// Link-budget failure inside the engine (internal consistency).
    #[error("link budget failed inside the trial engine: {0}")]
    Impairments(#[from] crate::impairments::ImpairmentsError),
}

// ---------------------------------------------------------------------------
// Error-rate bookkeeping
// ---------------------------------------------------------------------------

/// One detector's tally at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorStats {
    /// Trials scored.
    pub trials: u64,
    /// Wrong decisions.
    pub errors: u64,
    /// Point estimate errors/trials.
    pub ser: f64,
    /// 95% confidence interval, lower edge.
    pub ci_low: f64,
    /// 95% confidence interval, upper edge.
    pub ci_high: f64,
    /// True when the Wilson interval was used (errors < 20), where the
    /// normal approximation is untrustworthy.
    pub ci_flagged: bool,
}

/// Two-sided 95% z quantile.
const Z_95: f64 = 1.959963984540054;

/// Builds the tally for `errors` wrong decisions out of `trials`.
///
/// The interval is the normal approximation for well-populated counts and
/// the Wilson score interval when errors < 20, flagged as such.
pub fn detector_stats(errors: u64, trials: u64) -> DetectorStats {
    assert!(trials > 0, "no trials to score");
    assert!(errors <= trials, "more errors than trials");
    let n = trials as f64;
    let p = errors as f64 / n;
    let flagged = errors < 20;
    let (lo, hi) = if flagged {
        let z2 = Z_95 * Z_95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        (center - half, center + half)
    } else {
        let half = Z_95 * (p * (1.0 - p) / n).sqrt();
        (p - half, p + half)
    };
    DetectorStats {
        trials,
        errors,
        ser: p,
        // Exact endpoints at the boundaries; the interval formulas leave
        // rounding residue there.
        ci_low: if errors == 0 { 0.0 } else { lo.max(0.0) },
        ci_high: if errors == trials { 1.0 } else { hi.min(1.0) },
        ci_flagged: flagged,
    }
}

/// One grid point of a sweep: the swept value and both detectors' tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Swept variable's value at this point.
    pub value: f64,
    /// TDoA-detector tally.
    pub dsk: DetectorStats,
    /// Channel-matching baseline tally.
    pub ssk: DetectorStats,
    /// Magnitude-variant tally.
    pub dsk_magnitude: DetectorStats,
    /// Fraction of trials where the magnitude variant agreed with the
    /// weighted detector's decision.
    pub magnitude_agreement: f64,
    /// Pilot-overhead ratio, when the scenario spends symbols on pilots.
    pub overhead: Option<f64>,
    /// Mean per-antenna SNR across trials, in dB.
    pub mean_snr_db: f64,
}

/// A complete sweep result: the variable name and its per-point tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct SerCurve {
    /// Name of the swept variable (e.g. "snr_db").
    pub variable: String,
    /// Per-point results, in grid order.
    pub points: Vec<SweepPoint>,
}

// ---------------------------------------------------------------------------
// Pilot overhead
// ---------------------------------------------------------------------------

/// Pilot-overhead ratio `2 N_p / (U + 2 N_p)`: the two-transmitter
/// alphabet spends `2 N_p` pilot symbols per update window of `U` data
/// symbols.
pub fn overhead_ratio(n_p: usize, u: usize) -> f64 {
    assert!(n_p >= 1 && u >= 1, "overhead needs N_p >= 1 and U >= 1");
    let p = 2.0 * n_p as f64;
    p / (u as f64 + p)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_basics() {
        let s = detector_stats(0, 1000);
        assert_eq!(s.ser, 0.0);
        assert!(s.ci_flagged);
        assert_eq!(s.ci_low, 0.0);
        // Wilson upper edge for zero events: z^2/(n + z^2).
        let z2 = Z_95 * Z_95;
        assert!((s.ci_high - z2 / (1000.0 + z2)).abs() <= 1e-12);

        let s = detector_stats(100, 1000);
        assert!(!s.ci_flagged);
        assert!((s.ser - 0.1).abs() <= 1e-15);
        let half = Z_95 * (0.1f64 * 0.9 / 1000.0).sqrt();
        assert!((s.ci_high - s.ci_low - 2.0 * half).abs() <= 1e-12);
        assert!(s.ci_low > 0.08 && s.ci_high < 0.12);

        // Degenerate all-error tally stays within [0, 1].
        let s = detector_stats(50, 50);
        assert_eq!(s.ser, 1.0);
        assert!(s.ci_high <= 1.0);
    }

    #[test]
    fn overhead_ratio_matches_update_periods() {
        assert!((overhead_ratio(4, 10) - 8.0 / 18.0).abs() <= 1e-15);
        assert_eq!(overhead_ratio(4, 8), 0.5);
        assert!(overhead_ratio(4, 10_000_000) < 1e-5);

        // The eight reported overhead columns, from their update-window
        // lengths, each within half a percentage point.
        let columns = [
            (10, 44.0),
            (34, 19.0),
            (117, 6.42),
            (392, 2.0),
            (1592, 0.50),
            (4436, 0.18),
            (11421, 0.07),
            (39992, 0.02),
        ];
        for (u, percent) in columns {
            let got = overhead_ratio(4, u) * 100.0;
            assert!(
                (got - percent).abs() <= 0.5,
                "U={u}: overhead {got:.3}% vs {percent}%"
            );
        }
    }
}
