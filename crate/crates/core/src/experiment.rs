//! Config-driven experiments: TOML in, CSV tables and a JSON summary out.
//!
//! A config has an `[experiment]` section, a `[model]` section and an
//! optional section per experiment kind:
//!
//! ```toml
//! [experiment]
//! kind = "largedev"
//! seed_base = 12345
//! reps = 50000
//! block_exponent = 0.4
//! n_grid = [100000]
//! output_dir = "out/largedev"
//!
//! [model]
//! family = "iid_pareto"
//! alpha = 0.5
//! p = 0.7
//!
//! [largedev]
//! x_grid = [1.0, 2.0, 4.0]
//! ```
//!
//! CSV files depend only on the config, so rerunning a config reproduces
//! them byte for byte. The summary also records wall-clock time.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::blocks::BlockScheme;
use crate::diagnostics::{
    cf_gap, condition31_grid, converge_study, coupled_sup_differences, large_dev_curve_with, laplace_gap_with,
    lemma21_check, median, mixing_ledger, mixing_ledger_with_rho, ppp_counts, separated_block_correlation,
    trim_admissibility, trim_exponent, block_trim_experiment, write_series_csv, EstimateSeries, MixingRate,
    ProductEstimator, TailEstimator, TestFunctionSpec,
};
use crate::error::{Error, Result};
use crate::levy::write_cdf_table;
use crate::models::{Family, RegVarSpec};

/// Experiment kinds accepted in `[experiment] kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// Block-sum tail probabilities against `c_+- x^-alpha`.
    Largedev,
    /// Truncated first moment of block sums (`alpha < 1`).
    Lemma21,
    /// Blockwise Laplace functional factorization and the mixing ledger.
    Mixing,
    /// Concentration of the small-jump part of `W_n`.
    Cond31,
    /// Characteristic-function factorization gap.
    C2gap,
    /// Point-process counts against the limit measure.
    Ppp,
    /// Law of `W_n(1)` and J1 distance to a coupled limit path.
    Converge,
    /// Block trimming.
    Trim,
    /// Refinement of truncated limit paths and the law of `W_0(1)`.
    Levy,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Largedev,
        ExperimentKind::Lemma21,
        ExperimentKind::Mixing,
        ExperimentKind::Cond31,
        ExperimentKind::C2gap,
        ExperimentKind::Ppp,
        ExperimentKind::Converge,
        ExperimentKind::Trim,
        ExperimentKind::Levy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Largedev => "largedev",
            ExperimentKind::Lemma21 => "lemma21",
            ExperimentKind::Mixing => "mixing",
            ExperimentKind::Cond31 => "cond31",
            ExperimentKind::C2gap => "c2gap",
            ExperimentKind::Ppp => "ppp",
            ExperimentKind::Converge => "converge",
            ExperimentKind::Trim => "trim",
            ExperimentKind::Levy => "levy",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// `[model]` section; the family tag selects the remaining keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum ModelConfig {
    IidPareto {
        alpha: f64,
        p: f64,
    },
    MovingAverage {
        alpha: f64,
        p: f64,
        coeffs: Vec<f64>,
    },
    Garch11 {
        a0: f64,
        a1: f64,
        b1: f64,
        #[serde(default)]
        squared: bool,
    },
    StochVol {
        alpha: f64,
        p: f64,
        phi: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelSection {
    #[serde(flatten)]
    model: ModelConfig,
    burn_in: Option<usize>,
    pilot_size: Option<usize>,
}

impl ModelSection {
    fn build(&self) -> Result<RegVarSpec> {
        let mut spec = match &self.model {
            ModelConfig::IidPareto { alpha, p } => RegVarSpec::iid_pareto(*alpha, *p)?,
            ModelConfig::MovingAverage { alpha, p, coeffs } => RegVarSpec::moving_average(*alpha, *p, coeffs.clone())?,
            ModelConfig::Garch11 { a0, a1, b1, squared } => RegVarSpec::garch11(*a0, *a1, *b1, *squared)?,
            ModelConfig::StochVol { alpha, p, phi, scale } => RegVarSpec::stoch_vol(*alpha, *p, *phi, *scale)?,
        };
        if let Some(b) = self.burn_in {
            spec = spec.with_burn_in(b);
        }
        if let Some(s) = self.pilot_size {
            spec = spec.with_pilot_size(s);
        }
        Ok(spec)
    }
}

fn default_beta() -> f64 {
    0.4
}
fn default_u_grid() -> Vec<f64> {
    vec![0.1, 0.25, 0.5]
}
fn default_delta() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("fclt-out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    kind: String,
    seed_base: u64,
    reps: usize,
    #[serde(default = "default_beta")]
    block_exponent: f64,
    n_grid: Vec<usize>,
    #[serde(default = "default_u_grid")]
    u_grid: Vec<f64>,
    #[serde(default = "default_delta")]
    delta: Vec<f64>,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
}

/// `[largedev]` options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LargeDevOptions {
    pub x_grid: Vec<f64>,
    /// Relative tolerance of the pass flags.
    pub tolerance: f64,
    /// Defaults to the conditional estimator for i.i.d. Pareto models.
    pub estimator: Option<TailEstimator>,
}

impl Default for LargeDevOptions {
    fn default() -> Self {
        LargeDevOptions {
            x_grid: vec![1.0, 2.0, 4.0],
            tolerance: 0.15,
            estimator: None,
        }
    }
}

/// `[lemma21]` options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma21Options {
    pub tolerance: f64,
}

impl Default for Lemma21Options {
    fn default() -> Self {
        Lemma21Options { tolerance: 0.10 }
    }
}

/// Geometric bound `rho_j <= c ratio^j` on the rho-mixing coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricBound {
    pub c: f64,
    pub ratio: f64,
}

/// `[mixing]` options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixingOptions {
    /// Threshold of the tent test function.
    pub test_r: f64,
    pub product: ProductEstimator,
    /// Lag between the two blocks of the separated-correlation check.
    pub lag: Option<usize>,
    pub rho_bound: Option<GeometricBound>,
}

impl Default for MixingOptions {
    fn default() -> Self {
        MixingOptions {
            test_r: 0.5,
            product: ProductEstimator::FreshBlocks,
            lag: None,
            rho_bound: None,
        }
    }
}

/// `[c2gap]` options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CfGapOptions {
    pub z_grid: Vec<f64>,
}

impl Default for CfGapOptions {
    fn default() -> Self {
        CfGapOptions {
            z_grid: vec![0.5, 1.0, 2.0],
        }
    }
}

/// `[ppp]` options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PppOptions {
    pub r_grid: Vec<f64>,
}

impl Default for PppOptions {
    fn default() -> Self {
        PppOptions {
            r_grid: vec![0.5, 1.0, 2.0],
        }
    }
}

/// `[converge]` options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeOptions {
    /// Replications for which the J1 distance is computed.
    pub j1_reps: usize,
    /// Truncation level of the coupled limit path.
    pub u_levy: f64,
}

impl Default for ConvergeOptions {
    fn default() -> Self {
        ConvergeOptions {
            j1_reps: 50,
            u_levy: 0.05,
        }
    }
}

/// `[trim]` options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrimOptions {
    /// Block-count rate exponent: `k_n = o(n^t)`.
    pub t: f64,
    pub test_r: f64,
}

impl Default for TrimOptions {
    fn default() -> Self {
        TrimOptions { t: 0.6, test_r: 0.5 }
    }
}

/// `[levy]` options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevyOptions {
    /// Points of the distribution-function table of `W_0(1)`.
    pub x_grid: Vec<f64>,
}

impl Default for LevyOptions {
    fn default() -> Self {
        LevyOptions {
            x_grid: (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect(),
        }
    }
}

/// Per-kind options, all defaulted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KindOptions {
    pub largedev: LargeDevOptions,
    pub lemma21: Lemma21Options,
    pub mixing: MixingOptions,
    pub c2gap: CfGapOptions,
    pub ppp: PppOptions,
    pub converge: ConvergeOptions,
    pub trim: TrimOptions,
    pub levy: LevyOptions,
}

// unknown top-level sections are caught by `KindOptions`
#[derive(Debug, Deserialize)]
struct ConfigFile {
    experiment: ExperimentSection,
    model: toml::Table,
    #[serde(flatten)]
    options: toml::Table,
}

/// A validated experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: RegVarSpec,
    pub n_grid: Vec<usize>,
    pub block_exponent: f64,
    pub u_grid: Vec<f64>,
    pub delta: Vec<f64>,
    pub reps: usize,
    pub seed_base: u64,
    pub output_dir: PathBuf,
    pub options: KindOptions,
}

impl ExperimentConfig {
    /// Parses and validates a TOML config.
    ///
    /// An unknown kind gives [`Error::UnknownExperiment`]; a bad model gives
    /// the model's own error; anything else gives [`Error::Config`].
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        let e = file.experiment;
        let kind = ExperimentKind::from_str(&e.kind)?;
        let section: ModelSection = file
            .model
            .try_into()
            .map_err(|err: toml::de::Error| Error::Parameter(format!("[model]: {err}")))?;
        let model = section.build()?;
        let options: KindOptions = file
            .options
            .try_into()
            .map_err(|err: toml::de::Error| Error::Config(err.to_string()))?;
        let cfg = ExperimentConfig {
            kind,
            model,
            n_grid: e.n_grid,
            block_exponent: e.block_exponent,
            u_grid: e.u_grid,
            delta: e.delta,
            reps: e.reps,
            seed_base: e.seed_base,
            output_dir: e.output_dir,
            options,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Reads and parses a config file. Relative output directories are kept
    /// relative to the working directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn check(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid is empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be strictly ascending".into()));
        }
        if self.reps < 100 {
            return Err(Error::Config(format!("reps must be at least 100, got {}", self.reps)));
        }
        if !(self.block_exponent > 0.0 && self.block_exponent < 1.0) {
            return Err(Error::Config(format!("block_exponent {} not in (0, 1)", self.block_exponent)));
        }
        if self.u_grid.is_empty() || self.u_grid.iter().any(|u| !(*u > 0.0 && u.is_finite())) {
            return Err(Error::Config("u_grid must be non-empty and positive".into()));
        }
        if self.delta.is_empty() || self.delta.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Config("delta must be non-empty and positive".into()));
        }
        Ok(())
    }
}

/// Severity of a [`Diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Ok,
    Warning,
    Error,
}

/// One finding of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub level: Level,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.level {
            Level::Ok => "OK",
            Level::Warning => "WARNING",
            Level::Error => "ERROR",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Checks a config against the rate and parameter requirements of the
/// limit theory. Never fails; problems are reported as diagnostics.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |level, message: String| out.push(Diagnostic { level, message });
    let (a, beta) = (cfg.model.alpha, cfg.block_exponent);
    if beta > 0.0 && beta < 1.0 {
        push(
            Level::Ok,
            format!("block exponent {beta} in (0, 1): r_n -> inf and k_n -> inf"),
        );
    } else {
        push(Level::Error, format!("block exponent {beta} not in (0, 1)"));
    }
    let s_max = 2.0 / a - 1.0;
    if beta < s_max {
        push(
            Level::Ok,
            format!("r_n = o(n^s) for some s < 2/alpha - 1 = {s_max:.4} holds with s in ({beta}, {s_max:.4})"),
        );
    } else {
        push(
            Level::Warning,
            format!(
                "block exponent {beta} >= 2/alpha - 1 = {s_max:.4}: the rho-mixing route to small-jump concentration does not apply"
            ),
        );
    }
    if cfg.kind == ExperimentKind::Lemma21 && a >= 1.0 {
        push(
            Level::Error,
            format!("the truncated first moment limit requires alpha in (0, 1), got alpha = {a}"),
        );
    }
    if cfg.kind == ExperimentKind::Cond31 && a >= 1.0 {
        push(
            Level::Warning,
            format!("alpha = {a} >= 1: the Markov bound via the truncated first moment is unavailable"),
        );
    }
    if cfg.kind == ExperimentKind::Trim {
        let adm = trim_admissibility(a, beta, cfg.options.trim.t);
        let level = if adm.block_count_ok && adm.trim_length_ok {
            Level::Ok
        } else {
            Level::Warning
        };
        push(
            level,
            format!(
                "trimming with t = {}: q = {:.4}, k_n = o(n^t) {}, l_n = o(r_n) {}",
                adm.t,
                adm.q,
                if adm.block_count_ok { "holds" } else { "fails" },
                if adm.trim_length_ok { "holds" } else { "fails" }
            ),
        );
    }
    if matches!(cfg.kind, ExperimentKind::Converge | ExperimentKind::Levy | ExperimentKind::Ppp)
        && cfg.model.limit_params().is_none()
    {
        push(
            Level::Error,
            "this experiment needs a closed-form limit measure (i.i.d. or moving-average model)".into(),
        );
    }
    out
}

/// Outcome of [`run`].
#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub output_dir: PathBuf,
    /// CSV files written, in order.
    pub csv_paths: Vec<PathBuf>,
    pub summary: Value,
    pub wall_clock_secs: f64,
}

/// Collects the outputs of one run.
struct Sink {
    dir: PathBuf,
    files: Vec<String>,
    checks: Vec<Value>,
    flags: BTreeMap<String, bool>,
    extra: serde_json::Map<String, Value>,
    seed_base: u64,
}

impl Sink {
    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        File::create(&path).map(BufWriter::new).map_err(|source| Error::Output {
            path: path.display().to_string(),
            source,
        })
    }

    fn series(&mut self, name: &str, series: &[EstimateSeries]) -> Result<()> {
        let w = self.create(name)?;
        write_series_csv(series, self.seed_base, w)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Records a check against row `row` (0-based, header excluded) of `csv`.
    #[allow(clippy::too_many_arguments)]
    fn check(&mut self, name: String, csv: &str, row: usize, estimate: f64, std_err: f64, target: f64, pass: bool) {
        self.checks.push(json!({
            "name": name,
            "csv": csv,
            "row": row,
            "estimate": num(estimate),
            "std_err": num(std_err),
            "target": num(target),
            "pass": pass,
        }));
    }

    fn flag(&mut self, name: &str, v: bool) {
        self.flags.insert(name.to_string(), v);
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn schemes(cfg: &ExperimentConfig) -> Result<Vec<BlockScheme>> {
    cfg.n_grid
        .iter()
        .map(|&n| BlockScheme::from_exponent(n, cfg.block_exponent))
        .collect()
}

/// Number of worker threads in effect.
pub fn worker_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        crate::exec::thread_cap().unwrap_or_else(rayon::current_num_threads)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Runs the experiment named by the config and writes its outputs to
/// `cfg.output_dir`: one or more CSV files and `summary.json`.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.check()?;
    let start = Instant::now();
    fs::create_dir_all(&cfg.output_dir).map_err(|source| Error::Output {
        path: cfg.output_dir.display().to_string(),
        source,
    })?;
    let mut sink = Sink {
        dir: cfg.output_dir.clone(),
        files: Vec::new(),
        checks: Vec::new(),
        flags: BTreeMap::new(),
        extra: serde_json::Map::new(),
        seed_base: cfg.seed_base,
    };
    match cfg.kind {
        ExperimentKind::Largedev => run_largedev(cfg, &mut sink)?,
        ExperimentKind::Lemma21 => run_lemma21(cfg, &mut sink)?,
        ExperimentKind::Mixing => run_mixing(cfg, &mut sink)?,
        ExperimentKind::Cond31 => run_cond31(cfg, &mut sink)?,
        ExperimentKind::C2gap => run_c2gap(cfg, &mut sink)?,
        ExperimentKind::Ppp => run_ppp(cfg, &mut sink)?,
        ExperimentKind::Converge => run_converge(cfg, &mut sink)?,
        ExperimentKind::Trim => run_trim(cfg, &mut sink)?,
        ExperimentKind::Levy => run_levy(cfg, &mut sink)?,
    }
    let wall = start.elapsed().as_secs_f64();
    let mut echo = serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?;
    // only the options section of the kind that ran
    if let Some(opts) = echo.get_mut("options").and_then(Value::as_object_mut) {
        opts.retain(|k, _| k == cfg.kind.name());
    }
    let summary = json!({
        "kind": cfg.kind.name(),
        "seed_base": cfg.seed_base,
        "reps": cfg.reps,
        "threads": worker_threads(),
        "wall_clock_seconds": wall,
        "config": echo,
        "csv_files": sink.files,
        "checks": sink.checks,
        "flags": sink.flags,
        "details": sink.extra,
    });
    let path = cfg.output_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|source| Error::Output {
        path: path.display().to_string(),
        source,
    })?;
    Ok(Report {
        config: cfg.clone(),
        output_dir: cfg.output_dir.clone(),
        csv_paths: sink.files.iter().map(|f| cfg.output_dir.join(f)).collect(),
        summary,
        wall_clock_secs: wall,
    })
}

fn run_largedev(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let o = &cfg.options.largedev;
    let est = o.estimator.unwrap_or(if cfg.model.family == Family::IidPareto {
        TailEstimator::Conditional
    } else {
        TailEstimator::Crude
    });
    let curves = large_dev_curve_with(&cfg.model, &cfg.n_grid, cfg.block_exponent, &o.x_grid, cfg.reps, cfg.seed_base, est)?;
    for (name, pick) in [("positive", 0usize), ("negative", 1)] {
        let series: Vec<EstimateSeries> = curves
            .iter()
            .map(|c| if pick == 0 { c.positive.clone() } else { c.negative.clone() })
            .collect();
        let file = format!("largedev_{name}.csv");
        sink.series(&file, &series)?;
        let mut row = 0;
        for s in &series {
            for i in 0..s.len() {
                let (e, t) = (s.estimates[i], s.targets[i]);
                let pass = t.is_finite() && t > 0.0 && ((e - t) / t).abs() <= o.tolerance;
                sink.check(
                    format!("{name} tail n={} x={}", s.n_values[i], s.grid[i]),
                    &file,
                    row,
                    e,
                    s.std_errs[i],
                    t,
                    pass,
                );
                row += 1;
            }
        }
    }
    sink.extra.insert("estimator".into(), json!(est));
    sink.extra.insert("tolerance".into(), json!(o.tolerance));
    Ok(())
}

fn run_lemma21(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let series = lemma21_check(&cfg.model, &cfg.n_grid, cfg.block_exponent, &cfg.u_grid, cfg.reps, cfg.seed_base)?;
    let file = "lemma21.csv";
    sink.series(file, &series)?;
    let tol = cfg.options.lemma21.tolerance;
    let mut row = 0;
    for s in &series {
        for i in 0..s.len() {
            let (e, t) = (s.estimates[i], s.targets[i]);
            let pass = t.is_finite() && ((e - t) / t).abs() <= tol;
            sink.check(format!("truncated moment n={} u={}", s.n_values[i], s.grid[i]), file, row, e, s.std_errs[i], t, pass);
            row += 1;
        }
    }
    sink.extra.insert("tolerance".into(), json!(tol));
    Ok(())
}

fn run_mixing(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let o = &cfg.options.mixing;
    let f = TestFunctionSpec::new(o.test_r)?;
    let mut gap = EstimateSeries {
        grid: vec![],
        estimates: vec![],
        std_errs: vec![],
        targets: vec![],
        n_values: vec![],
        reps: cfg.reps,
    };
    let mut terms = gap.clone();
    let mut details = Vec::new();
    for scheme in schemes(cfg)? {
        let g = laplace_gap_with(&cfg.model, scheme, f, cfg.reps, cfg.seed_base, o.product)?;
        let n = scheme.n as f64;
        gap.grid.push(n);
        gap.estimates.push(g.gap);
        gap.std_errs.push(g.gap_se);
        gap.targets.push(0.0);
        gap.n_values.push(scheme.n);
        terms.grid.push(n);
        terms.estimates.push(g.joint);
        terms.std_errs.push(g.joint_se);
        terms.targets.push(g.limit);
        terms.n_values.push(scheme.n);
        details.push(json!({
            "n": scheme.n, "r_n": scheme.r_n, "k_n": scheme.k_n,
            "joint": num(g.joint), "product": num(g.product), "product_se": num(g.product_se),
            "limit": num(g.limit),
        }));
    }
    sink.series("laplace_gap.csv", std::slice::from_ref(&gap))?;
    sink.series("laplace_joint.csv", std::slice::from_ref(&terms))?;
    for i in 0..gap.len() {
        let pass = gap.estimates[i].abs() <= 3.0 * gap.std_errs[i];
        sink.check(format!("gap n={} within 3 se of 0", gap.n_values[i]), "laplace_gap.csv", i, gap.estimates[i], gap.std_errs[i], 0.0, pass);
    }
    let abs: Vec<f64> = gap.estimates.iter().map(|g| g.abs()).collect();
    sink.flag("gap_decreasing_in_n", strictly_decreasing(&abs));
    let ledger = match o.rho_bound {
        Some(b) => mixing_ledger_with_rho(&cfg.model, |j| b.c * b.ratio.powi(j as i32)),
        None => mixing_ledger(&cfg.model),
    };
    let lag = o.lag.unwrap_or(match ledger.rate {
        MixingRate::MDependent(m) => m + 1,
        _ => 1,
    });
    let r = schemes(cfg)?[0].r_n;
    let corr = separated_block_correlation(&cfg.model, r, lag, cfg.reps, cfg.seed_base)?;
    if let Some(vanishes) = ledger.alpha_vanishes(lag) {
        if vanishes {
            sink.flag("separated_blocks_uncorrelated", corr.rho.abs() <= 3.0 * corr.std_err);
        }
    }
    sink.extra.insert("laplace".into(), Value::Array(details));
    sink.extra.insert("test_r".into(), json!(o.test_r));
    sink.extra.insert("product_estimator".into(), json!(o.product));
    sink.extra.insert("ledger".into(), serde_json::to_value(&ledger).map_err(|e| Error::Config(e.to_string()))?);
    sink.extra.insert(
        "separated_correlation".into(),
        json!({"block_length": r, "lag": lag, "rho": num(corr.rho), "std_err": num(corr.std_err)}),
    );
    Ok(())
}

fn run_cond31(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let bounded = cfg.model.alpha < 1.0;
    for (di, &delta) in cfg.delta.iter().enumerate() {
        let mut series = Vec::new();
        let mut rows = Vec::new();
        for (ni, scheme) in schemes(cfg)?.into_iter().enumerate() {
            let est = condition31_grid(&cfg.model, scheme, &cfg.u_grid, &[delta], cfg.reps, cfg.seed_base)?;
            // Markov bound 2 delta^-1 k_n E|Y| from the truncated first moment
            let moments = if bounded {
                Some(lemma21_check(&cfg.model, &[scheme.n], cfg.block_exponent, &cfg.u_grid, cfg.reps * scheme.k_n.min(100), cfg.seed_base)?.remove(0))
            } else {
                None
            };
            let mut s = EstimateSeries {
                grid: vec![],
                estimates: vec![],
                std_errs: vec![],
                targets: vec![],
                n_values: vec![],
                reps: cfg.reps,
            };
            for (j, e) in est.iter().enumerate() {
                let bound = moments.as_ref().map_or(f64::NAN, |m| 2.0 / delta * m.estimates[j]);
                let bound_se = moments.as_ref().map_or(f64::NAN, |m| 2.0 / delta * m.std_errs[j]);
                s.grid.push(e.u);
                s.estimates.push(e.prob);
                s.std_errs.push(e.std_err);
                s.targets.push(bound);
                s.n_values.push(scheme.n);
                rows.push((ni, j, e.prob, e.std_err, bound, bound_se));
            }
            series.push(s);
        }
        let file = format!("cond31_delta_{delta}.csv");
        sink.series(&file, &series)?;
        for (row, (ni, j, p, se, bound, bound_se)) in rows.into_iter().enumerate() {
            if bound.is_finite() {
                let pass = p <= bound + 3.0 * se.hypot(bound_se);
                sink.check(
                    format!("probability below Markov bound n={} u={} delta={delta}", cfg.n_grid[ni], cfg.u_grid[j]),
                    &file,
                    row,
                    p,
                    se,
                    bound,
                    pass,
                );
            }
        }
        let _ = di;
    }
    sink.extra.insert("target_column".into(), json!("Markov bound 2 delta^-1 k_n E[|S|/a_n 1{|S|/a_n <= u}]"));
    Ok(())
}

fn run_c2gap(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let zs = &cfg.options.c2gap.z_grid;
    let series: Vec<EstimateSeries> = schemes(cfg)?
        .into_iter()
        .map(|s| cf_gap(&cfg.model, s.n, s.r_n, zs, cfg.reps, cfg.seed_base))
        .collect::<Result<_>>()?;
    sink.series("c2gap.csv", &series)?;
    for (j, &z) in zs.iter().enumerate() {
        let gaps: Vec<f64> = series.iter().map(|s| s.estimates[j]).collect();
        sink.flag(&format!("gap_decreasing_in_n_z={z}"), strictly_decreasing(&gaps));
    }
    Ok(())
}

fn run_ppp(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let rs = &cfg.options.ppp.r_grid;
    let mut series = Vec::new();
    let mut disp = Vec::new();
    for scheme in schemes(cfg)? {
        let c = ppp_counts(&cfg.model, scheme, rs, cfg.reps, cfg.seed_base)?;
        // variance/mean of the counts; the Poisson limit has ratio 1
        disp.push(EstimateSeries {
            grid: c.series.grid.clone(),
            estimates: c.dispersion.clone(),
            std_errs: vec![f64::NAN; c.dispersion.len()],
            targets: vec![1.0; c.dispersion.len()],
            n_values: c.series.n_values.clone(),
            reps: cfg.reps,
        });
        series.push(c.series);
    }
    let file = "ppp.csv";
    sink.series(file, &series)?;
    sink.series("ppp_dispersion.csv", &disp)?;
    let mut row = 0;
    for s in &series {
        for i in 0..s.len() {
            let (e, se, t) = (s.estimates[i], s.std_errs[i], s.targets[i]);
            let pass = t.is_finite() && (e - t).abs() <= 3.0 * se;
            sink.check(format!("mean count n={} r={}", s.n_values[i], s.grid[i]), file, row, e, se, t, pass);
            row += 1;
        }
    }
    Ok(())
}

/// Standard deviation of the Kolmogorov limit law, the null spread of `sqrt(m) D_m`.
const KOLMOGOROV_SD: f64 = 0.2605;

fn run_converge(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let o = &cfg.options.converge;
    let mut ks = EstimateSeries {
        grid: vec![],
        estimates: vec![],
        std_errs: vec![],
        targets: vec![],
        n_values: vec![],
        reps: cfg.reps,
    };
    let mut j1 = ks.clone();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let r = converge_study(&cfg.model, n, cfg.block_exponent, cfg.reps, o.j1_reps, o.u_levy, cfg.seed_base)?;
        let nf = n as f64;
        ks.grid.push(nf);
        ks.estimates.push(r.ks);
        ks.std_errs.push(KOLMOGOROV_SD / (cfg.reps as f64).sqrt());
        ks.targets.push(0.0);
        ks.n_values.push(n);
        j1.grid.push(nf);
        j1.estimates.push(r.j1.mean);
        j1.std_errs.push(r.j1.std_err);
        j1.targets.push(0.0);
        j1.n_values.push(n);
        rows.push(json!({
            "n": n, "r_n": r.scheme.r_n, "k_n": r.scheme.k_n, "a_n": num(r.a_n), "c_hat": num(r.c_hat),
            "ks": num(r.ks), "j1_mean": num(r.j1.mean), "j1_median": num(r.j1_median), "j1_reps": r.j1.n,
        }));
    }
    sink.series("converge_ks.csv", std::slice::from_ref(&ks))?;
    sink.series("converge_j1.csv", std::slice::from_ref(&j1))?;
    sink.flag("ks_strictly_decreasing", strictly_decreasing(&ks.estimates));
    sink.extra.insert("trend".into(), Value::Array(rows));
    sink.extra.insert("ks_std_err".into(), json!("null standard deviation of the KS statistic, 0.2605/sqrt(reps)"));
    Ok(())
}

fn run_trim(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let o = &cfg.options.trim;
    let f = TestFunctionSpec::new(o.test_r)?;
    let q = trim_exponent(cfg.model.alpha, o.t);
    let mut gap = EstimateSeries {
        grid: vec![],
        estimates: vec![],
        std_errs: vec![],
        targets: vec![],
        n_values: vec![],
        reps: cfg.reps,
    };
    let mut bound = gap.clone();
    let mut rows = Vec::new();
    for scheme in schemes(cfg)? {
        let r = block_trim_experiment(&cfg.model, scheme, q, f, cfg.reps, cfg.seed_base)?;
        let n = scheme.n as f64;
        gap.grid.push(n);
        gap.estimates.push(r.gap);
        gap.std_errs.push(r.gap_se);
        gap.targets.push(r.lipschitz_bound);
        gap.n_values.push(scheme.n);
        bound.grid.push(n);
        bound.estimates.push(r.tail_bound);
        bound.std_errs.push(r.tail_bound_se);
        bound.targets.push(f64::NAN);
        bound.n_values.push(scheme.n);
        rows.push(json!({
            "n": scheme.n, "r_n": scheme.r_n, "l_n": r.l_n,
            "lipschitz_bound": num(r.lipschitz_bound), "lipschitz_se": num(r.lipschitz_se),
        }));
    }
    sink.series("trim_gap.csv", std::slice::from_ref(&gap))?;
    sink.series("trim_tail_bound.csv", std::slice::from_ref(&bound))?;
    for i in 0..gap.len() {
        let pass = gap.estimates[i] <= gap.targets[i] + 3.0 * gap.std_errs[i];
        sink.check(format!("gap below Lipschitz bound n={}", gap.n_values[i]), "trim_gap.csv", i, gap.estimates[i], gap.std_errs[i], gap.targets[i], pass);
    }
    sink.flag("gap_decreasing_in_n", strictly_decreasing(&gap.estimates));
    let adm = trim_admissibility(cfg.model.alpha, cfg.block_exponent, o.t);
    sink.extra.insert("admissibility".into(), json!(adm));
    sink.extra.insert("target_column".into(), json!("E sum_k min(1, |D_k| / (r a_n))"));
    sink.extra.insert("rows".into(), Value::Array(rows));
    Ok(())
}

/// Median and a standard error from the binomial order-statistic interval.
fn median_with_se(xs: &[f64]) -> (f64, f64) {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() as f64;
    let h = 1.96 * m.sqrt() / 2.0;
    let lo = ((m / 2.0 - h).floor().max(0.0)) as usize;
    let hi = ((m / 2.0 + h).ceil() as usize).min(s.len() - 1);
    (median(xs), (s[hi] - s[lo]) / (2.0 * 1.96))
}

fn run_levy(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let params = cfg
        .model
        .limit_params()
        .ok_or_else(|| Error::Parameter("no closed-form limit measure for this model".into()))?;
    let mut us = cfg.u_grid.clone();
    us.sort_by(|a, b| b.total_cmp(a));
    us.dedup();
    if us.len() < 2 {
        return Err(Error::Config("levy refinement needs at least two truncation levels".into()));
    }
    let coarse: Vec<(f64, f64)> = us[1..].iter().map(|&u| (us[0], u)).collect();
    let successive: Vec<(f64, f64)> = us.windows(2).map(|w| (w[0], w[1])).collect();
    let all: Vec<(f64, f64)> = coarse.iter().chain(&successive).copied().collect();
    let diffs = coupled_sup_differences(&params, &all, cfg.reps, cfg.seed_base)?;
    let mk = |range: std::ops::Range<usize>, pairs: &[(f64, f64)]| {
        let mut s = EstimateSeries {
            grid: vec![],
            estimates: vec![],
            std_errs: vec![],
            targets: vec![],
            n_values: vec![],
            reps: cfg.reps,
        };
        for (j, &(_, fine)) in range.zip(pairs) {
            let (m, se) = median_with_se(&diffs[j]);
            s.grid.push(fine);
            s.estimates.push(m);
            s.std_errs.push(se);
            s.targets.push(0.0);
            s.n_values.push(0);
        }
        s
    };
    let a = mk(0..coarse.len(), &coarse);
    let b = mk(coarse.len()..all.len(), &successive);
    sink.series("levy_refinement_coarse.csv", std::slice::from_ref(&a))?;
    sink.series("levy_refinement_successive.csv", std::slice::from_ref(&b))?;
    // against the coarsest path, finer levels add more jumps; successive
    // differences are the ones that vanish
    sink.flag("coarse_pair_medians_decrease_with_finer_u", strictly_decreasing(&a.estimates));
    sink.flag("successive_pair_medians_decrease", strictly_decreasing(&b.estimates));
    let file = "levy_cdf.csv";
    let w = sink.create(file)?;
    write_cdf_table(&params, &cfg.options.levy.x_grid, w)?;
    sink.files.push(file.to_string());
    sink.extra.insert("limit_params".into(), json!(params));
    sink.extra.insert("coarse_level".into(), json!(us[0]));
    Ok(())
}
