//! Experiment configuration: per-kind defaults, JSON config files and
//! command-line overrides, merged with precedence flags > config > defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use kol_core::analytic::{InversionPolicy, WorkingPrecision};
use kol_core::pde::FPGrid;
use kol_core::rate::{validate_rate, RateSpec};
use kol_core::sde::{OUParams, SimConfig};
use kol_core::stats::TransitionOptions;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Version of the configuration layout accepted by this build.
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Environment variable consulted for the worker count when neither a flag
/// nor the config file sets it.
pub const WORKERS_ENV: &str = "KOL_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Analyze,
    Analytic,
    Pde,
    VerifySpecfun,
    Reproduce,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Analyze => "analyze",
            Self::Analytic => "analytic",
            Self::Pde => "pde",
            Self::VerifySpecfun => "verify-specfun",
            Self::Reproduce => "reproduce",
        }
    }
}

/// Named reproduction recipes. Each accepts a short figure-style name and a
/// descriptive alias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    /// Zero-drift waiting-time density and its power-law slope.
    ZeroDriftDensity,
    /// Survival curves for several drift strengths.
    SurvivalSweep,
    /// Exponential tail slopes and transition points.
    TailTable,
    /// Intermediate and long-time regimes of the exact density.
    AnalyticRegimes,
    /// Lower bound on the survival function from a negative start.
    SurvivalBound,
}

impl Recipe {
    pub const ALL: [Recipe; 5] =
        [Self::ZeroDriftDensity, Self::SurvivalSweep, Self::TailTable, Self::AnalyticRegimes, Self::SurvivalBound];

    pub fn name(self) -> &'static str {
        match self {
            Self::ZeroDriftDensity => "zero-drift-density",
            Self::SurvivalSweep => "survival-sweep",
            Self::TailTable => "tail-table",
            Self::AnalyticRegimes => "analytic-regimes",
            Self::SurvivalBound => "survival-bound",
        }
    }

    /// Figure-style names accepted on the command line.
    pub fn short_names(self) -> &'static [&'static str] {
        match self {
            Self::ZeroDriftDensity => &["fig5.1"],
            Self::SurvivalSweep => &["fig5.2"],
            Self::TailTable => &["fig5.3+table1", "table1", "fig5.3"],
            Self::AnalyticRegimes => &["prop2.1"],
            Self::SurvivalBound => &["thm2.1a"],
        }
    }
}

impl FromStr for Recipe {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s || r.short_names().contains(&s))
            .ok_or_else(|| {
                let known: Vec<String> = Recipe::ALL
                    .iter()
                    .map(|r| format!("{} ({})", r.short_names()[0], r.name()))
                    .collect();
                CliError::Config(format!("unknown recipe '{s}'; known recipes: {}", known.join(", ")))
            })
    }
}

/// Estimator settings: bins, fit windows, transition detection, bound
/// checks and inversion policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Histogram bin width and survival grid spacing.
    pub bin_width: f64,
    /// Power-law fit window `[t_a, t_b]`.
    pub power_window: Option<[f64; 2]>,
    /// Exponential fit window `[t_a, t_b]`.
    pub exponential_window: Option<[f64; 2]>,
    pub transition: TransitionOptions,
    /// Exponent slack `α` of the bound `S(t) >= t^{-1/2-α}/2`.
    pub alpha: f64,
    /// Window on which the survival bound is checked.
    pub bound_window: Option<[f64; 2]>,
    /// Evaluation times for analytic and PDE outputs.
    pub times: Vec<f64>,
    /// Policy for transforms with extended-precision evaluation.
    pub inversion: InversionPolicy,
    /// Policy for the density and survival transforms at drift strength ε,
    /// which evaluate in double precision only.
    pub density_inversion: InversionPolicy,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bin_width: 100.0,
            power_window: None,
            exponential_window: None,
            transition: TransitionOptions::default(),
            alpha: 0.1,
            bound_window: None,
            times: log_grid(0.1, 1e3, 41),
            inversion: InversionPolicy::gaver_stehfest(20).with_precision(WorkingPrecision::DoubleDouble),
            density_inversion: InversionPolicy::gaver_stehfest(16),
        }
    }
}

/// `n` log-spaced points from `a` to `b`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let r = (b / a).ln();
    (0..n).map(|i| a * (r * i as f64 / (n - 1) as f64).exp()).collect()
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub recipe: Option<Recipe>,
    pub params: OUParams,
    /// Drift strengths for multi-ε recipes; empty means `params.eps` only.
    pub eps_list: Vec<f64>,
    pub rate: RateSpec,
    pub sim: SimConfig,
    pub grid: Option<FPGrid>,
    pub analysis: AnalysisConfig,
    pub output_dir: PathBuf,
    /// Dataset CSV read by `analyze`.
    pub input: Option<PathBuf>,
}

/// Values given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub samples: Option<u64>,
    pub dt: Option<f64>,
    pub tmax: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub input: Option<PathBuf>,
}

const E3: f64 = 20.085_536_923_187_668;
const E4: f64 = 54.598_150_033_144_236;
const E5: f64 = 148.413_159_102_576_6;
const E7: f64 = 1_096.633_158_428_458_6;

/// Built-in defaults for a kind and recipe.
pub fn defaults(kind: ExperimentKind, recipe: Option<Recipe>) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        schema_version: CONFIG_SCHEMA_VERSION,
        kind,
        recipe,
        params: OUParams { eps: 1e-2, x0: 0.0 },
        eps_list: Vec::new(),
        rate: RateSpec::unit_step(),
        sim: SimConfig::default(),
        grid: None,
        analysis: AnalysisConfig::default(),
        output_dir: PathBuf::from("kol-out"),
        input: None,
    };
    match (kind, recipe) {
        (ExperimentKind::Pde, _) => {
            c.sim.t_max = Some(100.0);
            c.analysis.times = log_grid(0.1, 100.0, 31);
        }
        (ExperimentKind::Reproduce, Some(r)) => match r {
            Recipe::ZeroDriftDensity => {
                c.params.eps = 0.0;
                c.sim.t_max = Some(1100.0);
                c.analysis.power_window = Some([E4, E7]);
            }
            Recipe::SurvivalSweep => {
                c.eps_list = vec![4e-3, 1e-3];
                c.analysis.bin_width = 10.0;
                c.analysis.power_window = Some([E3, E5]);
            }
            Recipe::TailTable => {
                c.eps_list = vec![4e-3, 1e-3];
                c.analysis.bin_width = 2.5;
                c.analysis.transition =
                    TransitionOptions { bin_width: 2.5, t_low: Some(5.0), ..TransitionOptions::default() };
            }
            Recipe::AnalyticRegimes => {
                c.analysis.power_window = Some([400.0, 800.0]);
                c.analysis.times = vec![1.0, 5.0, 20.0];
            }
            Recipe::SurvivalBound => {
                c.params = OUParams { eps: 1e-4, x0: -2.0 };
                c.sim.t_max = Some(101.0);
                c.analysis.bin_width = 1.0;
                c.analysis.alpha = 0.1;
                c.analysis.bound_window = Some([20.0, 100.0]);
            }
        },
        _ => {}
    }
    c
}

/// Keys whose values replace the default wholesale instead of merging.
const REPLACED: [&str; 9] = [
    "rate",
    "grid",
    "eps_list",
    "times",
    "power_window",
    "exponential_window",
    "bound_window",
    "inversion",
    "density_inversion",
];

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) if !REPLACED.contains(&k.as_str()) && slot.is_object() && v.is_object() => {
                        merge(slot, v)
                    }
                    _ => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn schema_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config does not match the schema: {e}"))
}

/// Reads a config file as a JSON object.
pub fn read_config_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(schema_error)?;
    if !v.is_object() {
        return Err(schema_error("top level must be an object"));
    }
    Ok(v)
}

/// Merges defaults, the config file and the flags, then validates.
pub fn resolve(
    kind: ExperimentKind,
    recipe: Option<Recipe>,
    file: Option<&Value>,
    flags: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let mut v = serde_json::to_value(defaults(kind, recipe)).map_err(schema_error)?;
    if let Some(f) = file {
        if let Some(k) = f.get("kind") {
            if k != &Value::String(kind.name().into()) {
                return Err(CliError::Config(format!("config is for kind {k}, but '{}' was requested", kind.name())));
            }
        }
        if let (Some(r), Some(want)) = (f.get("recipe"), recipe) {
            let named: Recipe = serde_json::from_value(r.clone()).map_err(schema_error)?;
            if named != want {
                return Err(CliError::Config(format!(
                    "config is for recipe {}, but {} was requested",
                    named.name(),
                    want.name()
                )));
            }
        }
        merge(&mut v, f);
    }
    let mut c: ExperimentConfig = serde_json::from_value(v).map_err(schema_error)?;
    if c.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
            c.schema_version
        )));
    }
    let file_sets_workers = file.and_then(|f| f.get("sim")).and_then(|s| s.get("workers")).is_some();
    apply_flags(&mut c, flags, file_sets_workers)?;
    validate(&c)?;
    Ok(c)
}

fn apply_flags(c: &mut ExperimentConfig, f: &Overrides, file_sets_workers: bool) -> Result<(), CliError> {
    if let Some(eps) = f.eps {
        c.params.eps = eps;
        c.eps_list = vec![eps];
    }
    if let Some(seed) = f.seed {
        c.sim.seed = seed;
    }
    if let Some(n) = f.samples {
        c.sim.n_samples = n;
    }
    if let Some(dt) = f.dt {
        c.sim.dt = dt;
        if let Some(g) = c.grid.as_mut() {
            g.dt = dt;
        }
    }
    if let Some(t) = f.tmax {
        c.sim.t_max = Some(t);
        if let Some(g) = c.grid.as_mut() {
            g.t_end = t;
        }
    }
    if let Some(out) = &f.out {
        c.output_dir = out.clone();
    }
    if let Some(input) = &f.input {
        c.input = Some(input.clone());
    }
    if let Some(w) = f.workers {
        c.sim.workers = Some(w);
    } else if !file_sets_workers {
        if let Ok(s) = std::env::var(WORKERS_ENV) {
            let w = s
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("{WORKERS_ENV}='{s}' is not a worker count")))?;
            c.sim.workers = Some(w);
        }
    }
    Ok(())
}

/// Checks every sub-configuration against its own module's rules.
pub fn validate(c: &ExperimentConfig) -> Result<(), CliError> {
    let cfg = |e: kol_core::Error| CliError::Config(e.to_string());
    c.params.validate().map_err(cfg)?;
    c.sim.validate().map_err(cfg)?;
    validate_rate(&c.rate).map_err(cfg)?;
    for &eps in &c.eps_list {
        OUParams::new(eps, c.params.x0).map_err(cfg)?;
    }
    if let Some(g) = &c.grid {
        g.validate(&c.params).map_err(cfg)?;
    }
    c.analysis.inversion.validate().map_err(cfg)?;
    c.analysis.density_inversion.validate().map_err(cfg)?;
    let a = &c.analysis;
    if !(a.bin_width > 0.0 && a.bin_width.is_finite()) {
        return Err(CliError::Config(format!("analysis.bin_width must be positive, got {}", a.bin_width)));
    }
    for (name, w) in [
        ("power_window", a.power_window),
        ("exponential_window", a.exponential_window),
        ("bound_window", a.bound_window),
    ] {
        if let Some([lo, hi]) = w {
            if !(lo < hi && lo >= 0.0 && hi.is_finite()) {
                return Err(CliError::Config(format!("analysis.{name} [{lo}, {hi}] is not an interval")));
            }
        }
    }
    if a.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(CliError::Config("analysis.times must be positive".into()));
    }
    if c.kind == ExperimentKind::Analyze && c.input.is_none() {
        return Err(CliError::Config("analyze needs an input dataset (--input or config 'input')".into()));
    }
    Ok(())
}

/// The part of a configuration that determines the outputs; worker count,
/// output location and file format version are excluded.
#[derive(Debug, Serialize)]
pub struct RunIdentity<'a> {
    pub kind: ExperimentKind,
    pub recipe: Option<Recipe>,
    pub params: &'a OUParams,
    pub eps_list: &'a [f64],
    pub rate: &'a RateSpec,
    pub sim: SimConfig,
    pub grid: &'a Option<FPGrid>,
    pub analysis: &'a AnalysisConfig,
    pub input_sha256: Option<String>,
}

impl ExperimentConfig {
    pub fn identity(&self, input_sha256: Option<String>) -> RunIdentity<'_> {
        RunIdentity {
            kind: self.kind,
            recipe: self.recipe,
            params: &self.params,
            eps_list: &self.eps_list,
            rate: &self.rate,
            sim: SimConfig { workers: None, ..self.sim },
            grid: &self.grid,
            analysis: &self.analysis,
            input_sha256,
        }
    }

    /// Drift strengths to run: `eps_list`, or `params.eps` when it is empty.
    pub fn drift_strengths(&self) -> Vec<f64> {
        if self.eps_list.is_empty() {
            vec![self.params.eps]
        } else {
            self.eps_list.clone()
        }
    }
}
