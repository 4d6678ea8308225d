//! Command-line front end: sweep drivers, named experiment presets, CSV
//! output with a stable schema, and a fast numerical self-check suite.
//!
//! Every run writes two files into the output directory: `<name>.csv` with
//! the results (byte-identical across repeat runs with the same seed and
//! across worker counts) and `<name>.meta`, a small TOML document recording
//! the fully resolved configuration, the build identifier, and the wall
//! time (the meta file may differ between runs; the CSV never does).
//!
//! The tool never emits ANSI color codes, so `NO_COLOR` environments get
//! plain text by construction; argument-parser diagnostics follow the
//! `NO_COLOR` convention as well.
//!
//! Exit codes: 0 on success, 1 for configuration or usage problems, 2 when
//! a numerical check fails.

use std::ffi::OsString;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::coherence::{j_cct, j_dct_exact, j_dct_lower_bound, QuadratureSpec};
use crate::config::{
    parse_config, ConfigError, ExperimentConfig, RsuSweepVariable, ScenarioKind,
};
use crate::detection::{dsk_pair_terms, DskReference, Observation, PairStatistics};
use crate::geometry::{fingerprint, theta_e, toa, MdArray, Point2D};
use crate::impairments::{dbm_to_watts, snr, LinkBudget};
use crate::numerics::bessel_j0;
use crate::scenarios::{
    build_circular_cell, build_rsu, run_rsu_drive, run_ser_sweep, DetectorStats, RsuScenario,
};
use crate::waveform::{cross_correlate, kernel, synthesize, GridSpec, PhasePath, SincPulse};
use crate::SPEED_OF_LIGHT;

/// Build identifier embedded at compile time ("unknown" outside a checkout).
pub const BUILD_ID: &str = env!("DSKLINK_GIT_DESCRIBE");

/// Valid preset names, in documentation order.
pub const PRESET_NAMES: [&str; 7] = [
    "fig-ser-snr",
    "fig-ser-tc",
    "fig-phase-noise",
    "rsu-tupd",
    "rsu-distance",
    "rsu-phasenoise",
    "coherence-curves",
];

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failures surfaced to the shell, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Configuration file or value problem (exit 1).
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Filesystem problem around results (exit 1).
    #[error("{context}: {source}")]
    Io {
        /// What was being written or created.
        context: String,
        /// Underlying IO error.
        #[source]
        source: std::io::Error,
    },
    /// Preset name not in [`PRESET_NAMES`] (exit 1).
    #[error("unknown preset {given:?}; valid presets: {valid}")]
    UnknownPreset {
        /// The name as typed.
        given: String,
        /// Comma-separated valid names.
        valid: String,
    },
    /// Other usage problem (exit 1).
    #[error("{0}")]
    Usage(String),
    /// A numerical routine failed or an internal consistency check did
    /// not hold (exit 2).
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    /// Shell exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_)
            | CliError::Io { .. }
            | CliError::UnknownPreset { .. }
            | CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

/// Wraps an engine error as a numeric failure.
fn numeric<E: std::fmt::Display>(err: E) -> CliError {
    CliError::Numeric(err.to_string())
}

// ---------------------------------------------------------------------------
// Argument schema
// ---------------------------------------------------------------------------

/// Link-level experiments for direction-shift keying over distributed
/// mmWave antennas.
#[derive(Debug, Parser)]
#[command(name = "dsklink", version, about)]
pub struct Cli {
    /// TOML configuration file (defaults apply when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Trials-per-point override (data symbols for corridor runs).
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Output directory override.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = automatic).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Print machine-readable JSON summaries instead of prose.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the coherence curves (channel and direction) on the
    /// configured elapsed-time grid; writes coherence.csv.
    Coherence,
    /// Run the configured sweep for the configured scenario; writes
    /// sweep.csv.
    Sweep,
    /// Run a single corridor drive at the configured parameters; writes
    /// rsu.csv.
    Rsu,
    /// Run a named experiment preset; writes <name>.csv and <name>.meta.
    Preset {
        /// Preset name; see `--help` for the list.
        name: String,
    },
    /// Run the fast numerical self-check suite and print a pass/fail
    /// table (exit 0 only if every check passes, 2 otherwise).
    Validate {
        /// Propagation speed to build the link budget with; the default
        /// must reproduce the reference SNR figure, so a tampered value
        /// makes the budget check fail.
        #[arg(long, default_value_t = SPEED_OF_LIGHT)]
        speed_of_light: f64,
    },
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Parses the process arguments and runs; returns the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Runs with explicit arguments (first one is the program name); returns
/// the exit code instead of exiting, so tests can drive it in-process.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("dsklink: {err}");
            err.exit_code()
        }
    }
}

/// Applies command-line overrides onto the resolved configuration.
fn apply_overrides(config: &mut ExperimentConfig, cli: &Cli) {
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.trials = trials;
    }
    if let Some(out) = &cli.out {
        config.out = out.display().to_string();
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = the global
/// automatic pool). Results are identical either way; the knob only
/// controls parallelism.
fn with_pool<F, R>(workers: usize, f: F) -> Result<R, CliError>
where
    F: FnOnce() -> R + Send,
    R: Send,
{
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot build a {workers}-thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    if let Command::Validate { speed_of_light } = cli.command {
        return Ok(run_validate(speed_of_light, cli.json));
    }

    let mut config = parse_config(cli.config.as_deref())?;
    if let Command::Preset { name } = &cli.command {
        apply_preset(&mut config, name)?;
    }
    apply_overrides(&mut config, &cli);
    config.validate()?;

    let started = Instant::now();
    let outcome = with_pool(config.workers, || dispatch(&cli.command, &config))??;
    let wall_ms = started.elapsed().as_millis();

    let out_dir = PathBuf::from(&config.out);
    fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
        context: format!("cannot create output directory {}", out_dir.display()),
        source,
    })?;
    let csv_path = out_dir.join(format!("{}.csv", outcome.stem));
    fs::write(&csv_path, &outcome.csv).map_err(|source| CliError::Io {
        context: format!("cannot write {}", csv_path.display()),
        source,
    })?;
    let meta_path = out_dir.join(format!("{}.meta", outcome.stem));
    let meta = meta_text(&outcome.stem, &config, wall_ms, &outcome.notes);
    fs::write(&meta_path, meta).map_err(|source| CliError::Io {
        context: format!("cannot write {}", meta_path.display()),
        source,
    })?;

    if cli.json {
        println!(
            "{{\"csv\":{},\"rows\":{},\"wall_ms\":{},\"config_hash\":\"{:016x}\"}}",
            json_string(&csv_path.display().to_string()),
            outcome.rows,
            wall_ms,
            config.config_hash()
        );
    } else {
        println!(
            "wrote {} ({} rows) in {} ms",
            csv_path.display(),
            outcome.rows,
            wall_ms
        );
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// Result records and CSV
// ---------------------------------------------------------------------------

/// One CSV row of a trials-based experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    /// Swept variable's value.
    pub value: f64,
    /// Detector name: `dsk`, `ssk`, or `dsk_magnitude`.
    pub detector: &'static str,
    /// Trials scored.
    pub trials: u64,
    /// Wrong decisions.
    pub errors: u64,
    /// Point estimate.
    pub ser: f64,
    /// 95% confidence interval, lower edge.
    pub ci_low: f64,
    /// 95% confidence interval, upper edge.
    pub ci_high: f64,
    /// Pilot overhead, where the scenario spends symbols on pilots.
    pub overhead: Option<f64>,
    /// Mean per-antenna SNR in dB.
    pub mean_snr_db: f64,
    /// Seed that reproduces this row.
    pub seed: u64,
    /// Hash of the fully resolved configuration.
    pub config_hash: u64,
}

/// Header line of the trials-based CSV schema.
pub const RESULT_HEADER: &str =
    "value,detector,trials,errors,ser,ci_low,ci_high,overhead,mean_snr_db,seed,config_hash";

/// Full-precision scientific notation (shortest digits that round-trip).
pub fn sci(x: f64) -> String {
    format!("{x:e}")
}

impl ResultRecord {
    fn from_stats(
        value: f64,
        detector: &'static str,
        stats: &DetectorStats,
        overhead: Option<f64>,
        mean_snr_db: f64,
        seed: u64,
        config_hash: u64,
    ) -> Self {
        Self {
            value,
            detector,
            trials: stats.trials,
            errors: stats.errors,
            ser: stats.ser,
            ci_low: stats.ci_low,
            ci_high: stats.ci_high,
            overhead,
            mean_snr_db,
            seed,
            config_hash,
        }
    }

    /// The CSV row (no terminator).
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:016x}",
            sci(self.value),
            self.detector,
            self.trials,
            self.errors,
            sci(self.ser),
            sci(self.ci_low),
            sci(self.ci_high),
            self.overhead.map(sci).unwrap_or_default(),
            sci(self.mean_snr_db),
            self.seed,
            self.config_hash,
        )
    }
}

/// Renders header plus rows with LF endings.
pub fn results_csv(records: &[ResultRecord]) -> String {
    let mut body = String::with_capacity(64 * (records.len() + 1));
    body.push_str(RESULT_HEADER);
    body.push('\n');
    for record in records {
        body.push_str(&record.csv_row());
        body.push('\n');
    }
    body
}

/// A finished run: output stem, CSV body, row count, and meta notes.
struct RunOutcome {
    stem: String,
    csv: String,
    rows: usize,
    notes: String,
}

/// Meta sidecar: a small TOML document (run identity keys, then the full
/// resolved configuration, whose tables follow the top-level keys).
fn meta_text(stem: &str, config: &ExperimentConfig, wall_ms: u128, notes: &str) -> String {
    format!(
        "run = {stem:?}\nbuild = {BUILD_ID:?}\nwall_ms = {wall_ms}\nconfig_hash = \"{:016x}\"\n{notes}{}",
        config.config_hash(),
        config.canonical_toml(),
    )
}

// ---------------------------------------------------------------------------
// Dispatch and drivers
// ---------------------------------------------------------------------------

fn dispatch(command: &Command, config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    match command {
        Command::Coherence => coherence_outcome(config, "coherence"),
        Command::Sweep => match config.scenario {
            ScenarioKind::Circular => circular_outcome(config, "sweep"),
            ScenarioKind::Rsu => rsu_sweep_outcome(config, "sweep", false),
            ScenarioKind::Coherence => coherence_outcome(config, "sweep"),
        },
        Command::Rsu => rsu_single_outcome(config),
        Command::Preset { name } => match name.as_str() {
            "fig-ser-snr" | "fig-ser-tc" | "fig-phase-noise" => circular_outcome(config, name),
            "rsu-tupd" | "rsu-phasenoise" => rsu_sweep_outcome(config, name, false),
            "rsu-distance" => rsu_sweep_outcome(config, name, true),
            "coherence-curves" => coherence_outcome(config, name),
            other => Err(CliError::UnknownPreset {
                given: other.to_string(),
                valid: PRESET_NAMES.join(", "),
            }),
        },
        Command::Validate { .. } => unreachable!("validate handled before dispatch"),
    }
}

/// Rewrites the configuration to a named preset's operating point.
/// Command-line overrides are applied after this, so `--seed`, `--trials`,
/// and `--out` still work on presets.
pub fn apply_preset(config: &mut ExperimentConfig, name: &str) -> Result<(), CliError> {
    match name {
        "fig-ser-snr" => {
            // Static, phase-aligned cell: error rate against combined SNR.
            config.scenario = ScenarioKind::Circular;
            config.sweep.variable = "snr_db".to_string();
            config.sweep.grid = (0..=8).map(|i| 2.0 * i as f64).collect();
            config.circular.elapsed_time = 0.0;
        }
        "fig-ser-tc" => {
            // Reference staleness: error rate against elapsed time.
            config.scenario = ScenarioKind::Circular;
            config.sweep.variable = "elapsed_time".to_string();
            config.sweep.grid = vec![1e-6, 1e-5, 1e-4, 1e-3, 1e-2];
            config.circular.snr_db = 14.0;
        }
        "fig-phase-noise" => {
            // Oscillator drift over a fixed staleness interval.
            config.scenario = ScenarioKind::Circular;
            config.sweep.variable = "sigma_df".to_string();
            config.sweep.grid = vec![1.0, 10.0, 1e2, 1e3, 1e4, 1e5];
            config.circular.snr_db = 14.0;
            config.circular.elapsed_time = 5e-5;
        }
        "rsu-tupd" => {
            // Corridor drive against the reference refresh period
            // (equivalently, pilot overhead).
            config.scenario = ScenarioKind::Rsu;
            config.sweep.variable = "update_period".to_string();
            config.sweep.grid = [10.0, 34.0, 117.0, 392.0, 1592.0, 4436.0, 11421.0, 39992.0]
                .iter()
                .map(|u| u * 1e-6)
                .collect();
        }
        "rsu-distance" => {
            // Corridor drive against unit spacing; the start position
            // scales with the spacing so every point begins at the same
            // relative place in its cell.
            config.scenario = ScenarioKind::Rsu;
            config.sweep.variable = "rsu_spacing".to_string();
            config.sweep.grid = vec![50.0, 100.0, 150.0, 200.0];
            config.rsu.update_period = 1.17e-4;
        }
        "rsu-phasenoise" => {
            // Corridor drive against oscillator drift with references
            // refreshed often enough that vehicle motion alone leaves the
            // baseline healthy; only the oscillator walk degrades it.
            config.scenario = ScenarioKind::Rsu;
            config.sweep.variable = "sigma_df".to_string();
            config.sweep.grid = vec![1.0, 10.0, 1e2, 1e3, 1e4, 1e5];
            config.rsu.rsu_spacing = 50.0;
            config.rsu.start_x = 17.5;
            config.rsu.update_period = 1e-5;
        }
        "coherence-curves" => {
            config.scenario = ScenarioKind::Coherence;
        }
        other => {
            return Err(CliError::UnknownPreset {
                given: other.to_string(),
                valid: PRESET_NAMES.join(", "),
            });
        }
    }
    Ok(())
}

fn circular_outcome(config: &ExperimentConfig, stem: &str) -> Result<RunOutcome, CliError> {
    let variable = config.circular_sweep_variable()?;
    let scenario = build_circular_cell(config.circular.to_engine()).map_err(numeric)?;
    let curve = run_ser_sweep(
        &scenario,
        variable,
        &config.sweep.grid,
        config.trials,
        config.seed,
    )
    .map_err(numeric)?;
    let hash = config.config_hash();
    let mut records = Vec::with_capacity(3 * curve.points.len());
    for point in &curve.points {
        for (name, stats) in [
            ("dsk", &point.dsk),
            ("ssk", &point.ssk),
            ("dsk_magnitude", &point.dsk_magnitude),
        ] {
            records.push(ResultRecord::from_stats(
                point.value,
                name,
                stats,
                point.overhead,
                point.mean_snr_db,
                config.seed,
                hash,
            ));
        }
    }
    Ok(RunOutcome {
        stem: stem.to_string(),
        csv: results_csv(&records),
        rows: records.len(),
        notes: String::new(),
    })
}

/// Data symbols scored per corridor point: the configured trials, raised
/// when needed so the drive spans at least 1.2 refresh periods and the
/// realized overhead column is meaningful.
fn rsu_symbols(update_symbols: u64, trials: u64) -> u64 {
    trials.max(update_symbols + update_symbols / 5)
}

fn rsu_point_records(
    scenario: &RsuScenario,
    value: f64,
    trials: u64,
    seed: u64,
    hash: u64,
    records: &mut Vec<ResultRecord>,
) -> Result<(), CliError> {
    let symbols = rsu_symbols(scenario.u_symbols(), trials);
    let report = run_rsu_drive(scenario, symbols, seed).map_err(numeric)?;
    for (name, stats) in [("dsk", &report.dsk), ("ssk", &report.ssk)] {
        records.push(ResultRecord::from_stats(
            value,
            name,
            stats,
            Some(report.overhead),
            report.mean_snr_db,
            seed,
            hash,
        ));
    }
    Ok(())
}

const RSU_NOTES: &str =
    "# corridor runs score max(trials, 1.2 * refresh period) data symbols per point\n";

fn rsu_sweep_outcome(
    config: &ExperimentConfig,
    stem: &str,
    scale_start_with_spacing: bool,
) -> Result<RunOutcome, CliError> {
    let variable = config.rsu_sweep_variable()?;
    let base = config.rsu.to_engine();
    let hash = config.config_hash();
    let mut records = Vec::with_capacity(2 * config.sweep.grid.len());
    for (index, &value) in config.sweep.grid.iter().enumerate() {
        let mut point = variable.apply(&base, value);
        if scale_start_with_spacing && variable == RsuSweepVariable::Spacing {
            point.start_x = 0.35 * value;
        }
        let scenario = build_rsu(point).map_err(numeric)?;
        rsu_point_records(
            &scenario,
            value,
            config.trials,
            config.seed.wrapping_add(index as u64),
            hash,
            &mut records,
        )?;
    }
    Ok(RunOutcome {
        stem: stem.to_string(),
        csv: results_csv(&records),
        rows: records.len(),
        notes: RSU_NOTES.to_string(),
    })
}

fn rsu_single_outcome(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let scenario = build_rsu(config.rsu.to_engine()).map_err(numeric)?;
    let mut records = Vec::with_capacity(2);
    rsu_point_records(
        &scenario,
        config.rsu.update_period,
        config.trials,
        config.seed,
        config.config_hash(),
        &mut records,
    )?;
    Ok(RunOutcome {
        stem: "rsu".to_string(),
        csv: results_csv(&records),
        rows: records.len(),
        notes: RSU_NOTES.to_string(),
    })
}

/// Header line of the coherence-curve CSV schema.
pub const COHERENCE_HEADER: &str = "t_c,j_cct,j_dct_exact,j_dct_bound";

fn coherence_outcome(config: &ExperimentConfig, stem: &str) -> Result<RunOutcome, CliError> {
    let section = &config.coherence;
    if section.l1 != section.l2 {
        return Err(CliError::Usage(
            "the closed-form direction-coherence bound requires equal element radii \
             (set coherence.l1 == coherence.l2)"
                .to_string(),
        ));
    }
    let spec = QuadratureSpec::new(48, 1e-10).map_err(numeric)?;
    let grid = section.t_grid();
    let mut body = String::with_capacity(64 * (grid.len() + 1));
    body.push_str(COHERENCE_HEADER);
    body.push('\n');
    let mut rows = 0usize;
    for t_c in grid {
        let query = section.query_at(t_c);
        let cct = j_cct(&query).value;
        let exact = j_dct_exact(&query, &spec).map_err(numeric)?;
        let bound = j_dct_lower_bound(&query).map_err(numeric)?;
        if exact < bound - 1e-6 {
            return Err(CliError::Numeric(format!(
                "direction-coherence ordering violated at t_c = {t_c}: \
                 exact {exact} fell below its lower bound {bound}"
            )));
        }
        body.push_str(&format!(
            "{},{},{},{}\n",
            sci(t_c),
            sci(cct),
            sci(exact),
            sci(bound)
        ));
        rows += 1;
    }
    Ok(RunOutcome {
        stem: stem.to_string(),
        csv: body,
        rows,
        notes: "# quadrature: 48 nodes per panel, relative tolerance 1e-10\n".to_string(),
    })
}

// ---------------------------------------------------------------------------
// Self-check suite
// ---------------------------------------------------------------------------

/// One self-check result.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    /// Short stable name.
    pub name: &'static str,
    /// Whether the check passed.
    pub pass: bool,
    /// Human-readable measurement against its gate.
    pub detail: String,
}

fn check<F>(name: &'static str, body: F) -> CheckOutcome
where
    F: FnOnce() -> Result<(bool, String), String>,
{
    match body() {
        Ok((pass, detail)) => CheckOutcome { name, pass, detail },
        Err(detail) => CheckOutcome {
            name,
            pass: false,
            detail,
        },
    }
}

fn err_string<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

/// Runs the fast invariant suite with the given propagation speed.
///
/// The checks cover: the correlation kernel's energy identity on a sampled
/// grid, the detector's matched-pair identity, the exact-vs-bound ordering
/// of the direction-coherence curves, the arrival-angle change constraint,
/// the Bessel crossing that calibrates coherence time, and the free-space
/// SNR budget at the reference operating point.
pub fn validation_checks(speed_of_light: f64) -> Vec<CheckOutcome> {
    let mut checks = Vec::with_capacity(6);

    checks.push(check("correlation-energy", || {
        let pulse = SincPulse::new(1e8).map_err(err_string)?;
        let at_zero = kernel(&pulse, 0.0);
        let exact = pulse.symbol_energy();
        if (at_zero - exact).abs() > 1e-12 * exact {
            return Ok((false, format!("kernel(0) = {at_zero:e} != {exact:e}")));
        }
        let spec = GridSpec::new(2, 512).map_err(err_string)?;
        let grid =
            synthesize(&pulse, 1.0, 0.0, 0.0, &PhasePath::Zero, &spec).map_err(err_string)?;
        let sampled = cross_correlate(&grid, &grid, 0.0).map_err(err_string)?.re;
        let rel = (sampled - exact).abs() / exact;
        Ok((
            rel <= 2.5e-4,
            format!("sampled energy off by {rel:.3e} (gate 2.5e-4, truncation floor)"),
        ))
    }));

    checks.push(check("detector-identity", || {
        let pulse = SincPulse::new(1e8).map_err(err_string)?;
        let f_c = 30e9;
        let array = MdArray::circular(Point2D::new(3.0, -2.0), 5, 0.1, 0.3).map_err(err_string)?;
        let txs: Vec<Point2D> = (0..4)
            .map(|m| {
                let a = 2.0 * PI * m as f64 / 4.0 + 0.25;
                Point2D::new(100.0 * a.cos(), 100.0 * a.sin())
            })
            .collect();
        let mut fps = Vec::with_capacity(txs.len());
        for (m, &tx) in txs.iter().enumerate() {
            fps.push(
                fingerprint(tx, &array, SPEED_OF_LIGHT, f_c)
                    .map_err(err_string)?
                    .with_transmitter_index(m),
            );
        }
        let reference = DskReference::new(fps).map_err(err_string)?;
        let n = array.len();
        let v = 1;
        let taus: Vec<f64> = (0..n)
            .map(|i| toa(txs[v], array.element_position(i), SPEED_OF_LIGHT))
            .collect();
        let mut stats = PairStatistics::new(n, txs.len());
        for m in 0..txs.len() {
            for i in 1..n {
                for j in 0..i {
                    let lag = taus[i] - taus[j] - reference.pair_shift(m, i, j);
                    let phase = 2.0 * PI * f_c * (taus[i] - taus[j]);
                    stats.set(
                        m,
                        i,
                        j,
                        Complex64::from_polar(1.0, phase) * kernel(&pulse, lag),
                    );
                }
            }
        }
        let obs = Observation::Analytic(stats);
        let want = pulse.symbol_energy();
        let mut worst = 0.0f64;
        for term in dsk_pair_terms(&obs, &reference, v).map_err(err_string)? {
            worst = worst.max((term.weighted - want).abs() / want);
        }
        Ok((
            worst <= 1e-9,
            format!("matched pair terms off by at most {worst:.3e} (gate 1e-9)"),
        ))
    }));

    checks.push(check("coherence-ordering", || {
        let spec = QuadratureSpec::new(32, 1e-9).map_err(err_string)?;
        let section = crate::config::CoherenceSection::default();
        let mut min_margin = f64::INFINITY;
        for &t_c in &[0.5, 2.0, 5.0] {
            for &theta in &[PI / 6.0, PI / 4.0, 1.2] {
                let mut query = section.query_at(t_c);
                query.theta = theta;
                let exact = j_dct_exact(&query, &spec).map_err(err_string)?;
                let bound = j_dct_lower_bound(&query).map_err(err_string)?;
                min_margin = min_margin.min(exact - bound);
            }
        }
        Ok((
            min_margin >= -1e-9,
            format!("exact minus bound at least {min_margin:.3e} (gate -1e-9)"),
        ))
    }));

    checks.push(check("arrival-angle-bound", || {
        let d = 100.0f64;
        let step = 1.0;
        let limit = (step / d).asin();
        let mut worst = 0.0f64;
        for k in 0..16 {
            let heading = 2.0 * PI * k as f64 / 16.0;
            for &theta in &[0.0, 0.7] {
                let change = theta_e(d, theta, step, heading).map_err(err_string)?;
                worst = worst.max(change.abs());
            }
        }
        let reference = theta_e(d, 0.0, step, PI / 2.0).map_err(err_string)?;
        let expected = -0.00999966668666523821;
        if (reference - expected).abs() > 1e-12 {
            return Ok((
                false,
                format!("reference point {reference:e} != {expected:e}"),
            ));
        }
        Ok((
            worst <= limit + 1e-12,
            format!("worst |angle change| {worst:.6e} within asin(step/d) = {limit:.6e}"),
        ))
    }));

    checks.push(check("bessel-crossing", || {
        let deviation = (bessel_j0(1.125) - FRAC_1_SQRT_2).abs();
        Ok((
            deviation <= 2e-3,
            format!("|J0(9/8) - 1/sqrt(2)| = {deviation:.3e} (gate 2e-3)"),
        ))
    }));

    checks.push(check("snr-budget", move || {
        let budget = LinkBudget::with_speed_of_light(
            dbm_to_watts(5.0),
            30e9,
            1e-12,
            speed_of_light,
        )
        .map_err(err_string)?;
        let report = snr(&budget, 50.0, 5).map_err(err_string)?;
        let rel = (report.per_antenna - 0.801).abs() / 0.801;
        let array_dev = (report.array_gain_db - 10.0 * 5.0f64.log10()).abs();
        Ok((
            rel <= 5e-3 && array_dev <= 1e-9,
            format!(
                "per-antenna SNR {:.6} vs 0.801 (rel {rel:.3e}, gate 5e-3); \
                 array gain off by {array_dev:.3e} dB",
                report.per_antenna
            ),
        ))
    }));

    checks
}

/// Prints the self-check table (or JSON) and returns the exit code.
pub fn run_validate(speed_of_light: f64, json: bool) -> i32 {
    let checks = validation_checks(speed_of_light);
    let all_pass = checks.iter().all(|c| c.pass);
    if json {
        let rows: Vec<String> = checks
            .iter()
            .map(|c| {
                format!(
                    "{{\"name\":{},\"pass\":{},\"detail\":{}}}",
                    json_string(c.name),
                    c.pass,
                    json_string(&c.detail)
                )
            })
            .collect();
        println!(
            "{{\"speed_of_light\":{},\"pass\":{},\"checks\":[{}]}}",
            sci(speed_of_light),
            all_pass,
            rows.join(",")
        );
    } else {
        println!("self-check (propagation speed {} m/s)", sci(speed_of_light));
        for c in &checks {
            println!(
                "  {:<22} {}  {}",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.detail
            );
        }
        println!(
            "self-check: {}/{} passed",
            checks.iter().filter(|c| c.pass).count(),
            checks.len()
        );
    }
    if all_pass {
        0
    } else {
        2
    }
}

/// Minimal JSON string encoding (the suite emits ASCII details only).
fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
