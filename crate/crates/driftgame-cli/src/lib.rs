//! Experiment driver behind the `driftgame` binary.
//!
//! A single TOML file describes the game and the command-specific
//! knobs; each subcommand reads the blocks it needs, delegates the
//! math to the `driftgame` library, and writes a machine-readable
//! table (CSV with a versioned schema header, or JSON that re-parses
//! into the originating report type). Identical config and seed
//! produce byte-identical output.
//!
//! The driver itself is single-threaded; parallelism lives inside the
//! library's estimators and never affects results.

use driftgame::detect::{np_log_threshold, DetectError, Detector};
use driftgame::game::{
    canonical_attacker_deviations, canonical_detector_deviations, exponent_curve, game_value,
    is_admissible_attack, saddle_check, ExponentCurve, GameError, SaddleReport,
};
use driftgame::model::{
    attack_mass, bridge_attack, constant_bias_attack, simulate_path, AttackPolicy, AttackSignal,
    GameConfig, ModelError, RandomStream,
};
use driftgame::normal::{phi_cdf, phi_inv, NormalError, Probability};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

/// Seed used when neither the config file nor `--seed` provides one.
pub const DEFAULT_SEED: u64 = 42;

/// Anything that should terminate the run with exit code 1.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed request: bad flags, bad config values, empty grids.
    #[error("{0}")]
    Usage(String),
    /// Config file could not be read.
    #[error("cannot read config {path}: {source}")]
    ConfigRead {
        path: String,
        source: std::io::Error,
    },
    /// Config file could not be parsed.
    #[error("cannot parse config: {0}")]
    ConfigParse(#[from] toml::de::Error),
    /// Invalid game parameters or simulation failure.
    #[error(transparent)]
    Model(#[from] ModelError),
    /// Detector construction failure.
    #[error(transparent)]
    Detect(#[from] DetectError),
    /// Estimator failure.
    #[error(transparent)]
    Game(#[from] GameError),
    /// Probability or quantile domain failure.
    #[error(transparent)]
    Normal(#[from] NormalError),
    /// Output could not be written.
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

/// Output encoding for every subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    /// Comma-separated values with a `#`-prefixed schema header.
    Csv,
    /// Pretty-printed JSON that re-parses into the report type.
    Json,
}

// --- configuration file -----------------------------------------------

/// The `[game]` block: the four parameters of `GameConfig`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameTable {
    pub horizon: f64,
    pub unsafe_slope: f64,
    pub success_floor: f64,
    pub false_alarm_budget: f64,
}

/// The `[mc]` block: Monte Carlo size and base seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McTable {
    pub trials: u64,
    pub seed: u64,
}

impl Default for McTable {
    fn default() -> Self {
        McTable {
            trials: 1_000_000,
            seed: DEFAULT_SEED,
        }
    }
}

/// The `[paths]` block: sample-path emission.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsTable {
    pub count: u64,
    pub steps: usize,
    /// One of `zero`, `constant`, `bridge`.
    pub drift: String,
    /// Drift level, required when `drift = "constant"`.
    pub level: Option<f64>,
    /// Bridge target b, required when `drift = "bridge"`.
    pub target: Option<f64>,
}

impl Default for PathsTable {
    fn default() -> Self {
        PathsTable {
            count: 10,
            steps: 1_000,
            drift: "zero".to_owned(),
            level: None,
            target: None,
        }
    }
}

/// The `[exponents]` block: which horizons to chart.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExponentsTable {
    pub horizons: Vec<f64>,
}

/// One attacker deviation in config form; `kind` selects the signal
/// family and the matching parameter fields must be present.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviationSpec {
    /// One of `zero`, `constant`, `pulse`, `ramp`, `piecewise`.
    pub kind: String,
    pub level: Option<f64>,
    pub height: Option<f64>,
    pub start: Option<f64>,
    pub width: Option<f64>,
    pub slope: Option<f64>,
    pub values: Option<Vec<f64>>,
}

impl DeviationSpec {
    fn require(value: Option<f64>, kind: &str, field: &str) -> Result<f64, CliError> {
        value.ok_or_else(|| {
            CliError::Usage(format!("deviation kind '{kind}' requires field '{field}'"))
        })
    }

    /// Turns this description into an attack signal, or a usage error
    /// naming the missing field.
    pub fn to_signal(&self) -> Result<AttackSignal, CliError> {
        match self.kind.as_str() {
            "zero" => Ok(AttackSignal::Zero),
            "constant" => Ok(AttackSignal::ConstantBias {
                level: Self::require(self.level, "constant", "level")?,
            }),
            "pulse" => Ok(AttackSignal::Pulse {
                height: Self::require(self.height, "pulse", "height")?,
                start: Self::require(self.start, "pulse", "start")?,
                width: Self::require(self.width, "pulse", "width")?,
            }),
            "ramp" => Ok(AttackSignal::Ramp {
                slope: Self::require(self.slope, "ramp", "slope")?,
            }),
            "piecewise" => Ok(AttackSignal::PiecewiseConstant {
                values: self.values.clone().ok_or_else(|| {
                    CliError::Usage("deviation kind 'piecewise' requires field 'values'".into())
                })?,
            }),
            other => Err(CliError::Usage(format!(
                "unknown deviation kind '{other}' (expected zero, constant, pulse, ramp, or piecewise)"
            ))),
        }
    }
}

/// One detector deviation in config form.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSpec {
    /// One of `terminal_strict`, `lr`.
    pub kind: String,
    /// Fraction of the false-alarm budget spent, in (0, 1]; used by
    /// `terminal_strict`.
    pub budget_fraction: Option<f64>,
    /// Reference signal for `lr`.
    pub reference: Option<DeviationSpec>,
}

impl DetectorSpec {
    /// Builds the detector; calibration keeps every spec within the
    /// false-alarm budget by construction.
    pub fn to_detector(&self, config: &GameConfig) -> Result<Detector, CliError> {
        match self.kind.as_str() {
            "terminal_strict" => {
                let fraction = self.budget_fraction.ok_or_else(|| {
                    CliError::Usage(
                        "detector kind 'terminal_strict' requires field 'budget_fraction'".into(),
                    )
                })?;
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return Err(CliError::Usage(format!(
                        "budget_fraction must lie in (0, 1], got {fraction}"
                    )));
                }
                let spent = config.false_alarm_budget().value() * fraction;
                let upper = phi_inv(Probability::new(1.0 - spent)?)?;
                Ok(Detector::TerminalThreshold {
                    cutoff: config.horizon().sqrt() * upper,
                })
            }
            "lr" => {
                let reference = self
                    .reference
                    .as_ref()
                    .ok_or_else(|| {
                        CliError::Usage("detector kind 'lr' requires a 'reference' table".into())
                    })?
                    .to_signal()?;
                Ok(driftgame::detect::lr_detector(&reference, config)?)
            }
            other => Err(CliError::Usage(format!(
                "unknown detector kind '{other}' (expected terminal_strict or lr)"
            ))),
        }
    }
}

/// The `[saddle]` block: which deviations to test.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaddleTable {
    /// Include the library's stock deviation set.
    pub use_canonical: bool,
    pub attacker_deviations: Vec<DeviationSpec>,
    pub detector_deviations: Vec<DetectorSpec>,
}

impl Default for SaddleTable {
    fn default() -> Self {
        SaddleTable {
            use_canonical: true,
            attacker_deviations: Vec::new(),
            detector_deviations: Vec::new(),
        }
    }
}

/// A full experiment description, as parsed from the TOML file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameTable,
    #[serde(default)]
    pub mc: McTable,
    #[serde(default)]
    pub paths: PathsTable,
    #[serde(default)]
    pub exponents: ExponentsTable,
    #[serde(default)]
    pub saddle: SaddleTable,
}

impl ExperimentConfig {
    /// Parses a TOML document.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads and parses the file at `path`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Revalidates the game parameters into a `GameConfig`.
    pub fn game_config(&self) -> Result<GameConfig, CliError> {
        Ok(GameConfig::new(
            self.game.horizon,
            self.game.unsafe_slope,
            self.game.success_floor,
            self.game.false_alarm_budget,
        )?)
    }

    /// Base seed after applying a command-line override.
    pub fn seed(&self, override_seed: Option<u64>) -> u64 {
        override_seed.unwrap_or(self.mc.seed)
    }
}

// --- output helpers -----------------------------------------------------

/// Formats a float with 12 significant digits, the CSV contract.
fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Quotes a free-text CSV field (descriptions may contain commas).
fn quoted(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

// --- value ----------------------------------------------------------------

/// Closed-form quantities of one game instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueReport {
    pub horizon: f64,
    pub unsafe_slope: f64,
    pub success_floor: f64,
    pub false_alarm_budget: f64,
    /// Boundary bias theta_bar.
    pub bias_level: f64,
    /// Terminal alarm threshold of the equilibrium detector.
    pub alarm_cutoff: f64,
    /// Log likelihood-ratio threshold of the equilibrium test.
    pub log_lambda_star: f64,
    /// The same threshold out of log space.
    pub lambda_star: f64,
    /// Game value beta*.
    pub game_value: f64,
    /// True when c equals 1 - eps, where the value collapses to
    /// phi(-sqrt(T) d).
    pub symmetric_case: bool,
    /// The collapsed value, when applicable.
    pub symmetric_value: Option<f64>,
    /// Whether the collapsed and general formulas agree to 1e-12.
    pub symmetric_matches: Option<bool>,
}

/// Computes the closed-form report for `cmd value`.
pub fn value_report(config: &GameConfig) -> Result<ValueReport, CliError> {
    let log_lambda_star = np_log_threshold(&constant_bias_attack(config), config)?;
    let value = game_value(config).value();
    let symmetric = 1.0 - config.false_alarm_budget().value() == config.success_floor().value();
    let symmetric_value = if symmetric {
        Some(phi_cdf(-(config.horizon().sqrt() * config.unsafe_slope()))?.value())
    } else {
        None
    };
    Ok(ValueReport {
        horizon: config.horizon(),
        unsafe_slope: config.unsafe_slope(),
        success_floor: config.success_floor().value(),
        false_alarm_budget: config.false_alarm_budget().value(),
        bias_level: config.bias_level(),
        alarm_cutoff: config.alarm_cutoff(),
        log_lambda_star,
        lambda_star: log_lambda_star.exp(),
        game_value: value,
        symmetric_case: symmetric,
        symmetric_value,
        symmetric_matches: symmetric_value.map(|sym| (sym - value).abs() <= 1e-12),
    })
}

/// Runs the `value` subcommand.
pub fn cmd_value(
    experiment: &ExperimentConfig,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let config = experiment.game_config()?;
    let report = value_report(&config)?;
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "# driftgame CSV schema v1: value (quantity, value)")?;
            writeln!(out, "quantity,value")?;
            let rows: [(&str, String); 9] = [
                ("horizon", sig12(report.horizon)),
                ("unsafe_slope", sig12(report.unsafe_slope)),
                ("success_floor", sig12(report.success_floor)),
                ("false_alarm_budget", sig12(report.false_alarm_budget)),
                ("bias_level", sig12(report.bias_level)),
                ("alarm_cutoff", sig12(report.alarm_cutoff)),
                ("log_lambda_star", sig12(report.log_lambda_star)),
                ("lambda_star", sig12(report.lambda_star)),
                ("game_value", sig12(report.game_value)),
            ];
            for (name, value) in rows {
                writeln!(out, "{name},{value}")?;
            }
            writeln!(out, "symmetric_case,{}", report.symmetric_case)?;
            if let Some(sym) = report.symmetric_value {
                writeln!(out, "symmetric_value,{}", sig12(sym))?;
            }
            if let Some(matches) = report.symmetric_matches {
                writeln!(out, "symmetric_matches,{matches}")?;
            }
        }
    }
    Ok(())
}

// --- saddle -----------------------------------------------------------------

/// Runs the `saddle` subcommand: assembles the deviation set, skips
/// inadmissible attacker deviations with a warning on `warnings`, and
/// emits the report. The caller maps `all_pass` onto the exit status.
pub fn cmd_saddle(
    experiment: &ExperimentConfig,
    format: OutputFormat,
    seed_override: Option<u64>,
    out: &mut dyn Write,
    warnings: &mut dyn Write,
) -> Result<SaddleReport, CliError> {
    let config = experiment.game_config()?;
    if experiment.mc.trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }

    let mut attacks = Vec::new();
    let mut detectors = Vec::new();
    if experiment.saddle.use_canonical {
        attacks.extend(canonical_attacker_deviations(&config));
        detectors.extend(canonical_detector_deviations(&config)?);
    }
    for spec in &experiment.saddle.attacker_deviations {
        attacks.push(spec.to_signal()?);
    }
    for spec in &experiment.saddle.detector_deviations {
        detectors.push(spec.to_detector(&config)?);
    }

    // Inadmissible deviations say nothing about the saddle; list and
    // drop them rather than fail the run.
    attacks.retain(|signal| {
        if is_admissible_attack(signal, &config) {
            true
        } else {
            let _ = writeln!(
                warnings,
                "warning: skipping inadmissible attacker deviation '{signal}': mass {} is below \
                 the floor {} required by the success-rate constraint",
                attack_mass(signal, &config),
                config.mass_floor(),
            );
            false
        }
    });

    let report = saddle_check(
        &config,
        &attacks,
        &detectors,
        experiment.mc.trials,
        experiment.seed(seed_override),
    )?;

    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(
                out,
                "# driftgame CSV schema v1: saddle (row, description, alpha, beta, margin, mc_slack, pass)"
            )?;
            writeln!(out, "row,description,alpha,beta,margin,mc_slack,pass")?;
            writeln!(
                out,
                "value,{},,{},,,",
                quoted("closed form beta*"),
                sig12(report.value_closed_form.value())
            )?;
            writeln!(
                out,
                "equilibrium,{},,{},,,{}",
                quoted("monte carlo beta(theta*, phi*)"),
                sig12(report.beta_star.value()),
                report.value_agreement
            )?;
            for row in &report.attacker_deviations {
                writeln!(
                    out,
                    "attacker,{},,{},{},{},{}",
                    quoted(&row.description),
                    sig12(row.beta.value()),
                    sig12(row.margin),
                    sig12(row.mc_slack),
                    row.pass
                )?;
            }
            for row in &report.detector_deviations {
                writeln!(
                    out,
                    "detector,{},{},{},{},{},{}",
                    quoted(&row.description),
                    sig12(row.alpha.value()),
                    sig12(row.beta.value()),
                    sig12(row.margin),
                    sig12(row.mc_slack),
                    row.pass
                )?;
            }
            writeln!(
                out,
                "summary,{},,,,,{}",
                quoted("all_pass"),
                report.all_pass
            )?;
        }
    }
    Ok(report)
}

// --- paths -----------------------------------------------------------------

/// One emitted sample path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathRecord {
    pub path_id: u64,
    /// Grid values x(t_0..t_N).
    pub values: Vec<f64>,
}

/// The `paths` subcommand's JSON shape; CSV uses the long format
/// (path_id, t, x) instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathsReport {
    pub horizon: f64,
    pub steps: usize,
    pub seed: u64,
    pub drift: String,
    pub paths: Vec<PathRecord>,
}

fn resolve_drift(table: &PathsTable, config: &GameConfig) -> Result<AttackPolicy, CliError> {
    match table.drift.as_str() {
        "zero" => Ok(AttackPolicy::OpenLoop(AttackSignal::Zero)),
        "constant" => {
            let level = table
                .level
                .ok_or_else(|| CliError::Usage("drift 'constant' requires field 'level'".into()))?;
            Ok(AttackPolicy::OpenLoop(AttackSignal::ConstantBias { level }))
        }
        "bridge" => {
            let target = table
                .target
                .ok_or_else(|| CliError::Usage("drift 'bridge' requires field 'target'".into()))?;
            Ok(AttackPolicy::Feedback(bridge_attack(target, config)?))
        }
        other => Err(CliError::Usage(format!(
            "unknown drift '{other}' (expected zero, constant, or bridge)"
        ))),
    }
}

/// Runs the `paths` subcommand: simulates the requested paths and
/// emits them in long format (CSV) or as a structured report (JSON).
pub fn cmd_paths(
    experiment: &ExperimentConfig,
    format: OutputFormat,
    seed_override: Option<u64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let config = experiment.game_config()?;
    let table = &experiment.paths;
    if table.count == 0 {
        return Err(CliError::Usage("paths count must be at least 1".into()));
    }
    if table.steps == 0 {
        return Err(CliError::Usage("paths steps must be at least 1".into()));
    }
    let policy = resolve_drift(table, &config)?;
    let seed = experiment.seed(seed_override);

    let mut records = Vec::with_capacity(table.count as usize);
    for path_id in 0..table.count {
        let path = simulate_path(
            &policy,
            &config,
            table.steps,
            RandomStream::new(seed, path_id),
        )?;
        records.push(PathRecord {
            path_id,
            values: path.values().to_vec(),
        });
    }

    match format {
        OutputFormat::Json => {
            let report = PathsReport {
                horizon: config.horizon(),
                steps: table.steps,
                seed,
                drift: table.drift.clone(),
                paths: records,
            };
            serde_json::to_writer_pretty(&mut *out, &report).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "# driftgame CSV schema v1: paths (path_id, t, x)")?;
            writeln!(out, "path_id,t,x")?;
            let dt = config.horizon() / table.steps as f64;
            for record in &records {
                for (k, &x) in record.values.iter().enumerate() {
                    writeln!(
                        out,
                        "{},{},{}",
                        record.path_id,
                        sig12(k as f64 * dt),
                        sig12(x)
                    )?;
                }
            }
        }
    }
    Ok(())
}

// --- exponents ----------------------------------------------------------------

/// Runs the `exponents` subcommand over the configured horizon grid.
pub fn cmd_exponents(
    experiment: &ExperimentConfig,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let config = experiment.game_config()?;
    let horizons = &experiment.exponents.horizons;
    if horizons.is_empty() {
        return Err(CliError::Usage("horizon grid must be nonempty".into()));
    }
    if let Some(&bad) = horizons.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
        return Err(CliError::Usage(format!(
            "horizons must be positive, got {bad}"
        )));
    }
    let curve: ExponentCurve = exponent_curve(&config, horizons)?;

    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &curve).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(
                out,
                "# driftgame CSV schema v1: exponents (T, theta_bar, neg_log_beta, first_order_term, second_order_term, hoeffding_bound, residual)"
            )?;
            writeln!(
                out,
                "T,theta_bar,neg_log_beta,first_order_term,second_order_term,hoeffding_bound,residual"
            )?;
            for row in curve.rows() {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    sig12(row.horizon),
                    sig12(row.bias_level),
                    sig12(row.neg_log_beta),
                    sig12(row.first_order_term),
                    sig12(row.second_order_term),
                    sig12(row.hoeffding_bound),
                    sig12(row.residual)
                )?;
            }
        }
    }
    Ok(())
}
