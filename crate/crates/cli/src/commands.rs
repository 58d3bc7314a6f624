//! Single-purpose experiments behind the `simulate`, `analyze`, `analytic`,
//! `pde` and `verify-specfun` subcommands.

use std::path::PathBuf;

use kol_core::analytic::{inverse_laplace, LaplaceModel};
use kol_core::output::{csv_document, sha256_hex};
use kol_core::pde::{solve_fokker_planck, FPGrid};
use kol_core::sde::{simulate_batch, WaitingTimeDataset};
use kol_core::specfun::{identity_checks, validation_table, AccuracyPolicy, IdentityCheck};
use kol_core::stats::{
    detect_transition, fit_exponential_tail, fit_power_law, histogram_pdf, survival_curve, LineFit, SurvivalCurve,
    TailReport,
};
use kol_core::Error;
use serde::Serialize;
use serde_json::Value;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::RunOutput;
use crate::recipes::run_recipe;
use crate::{at_stage, CliError};

/// Result of any subcommand: its JSON results and the files it wrote.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub kind: &'static str,
    pub results: Value,
    pub artifacts: Vec<PathBuf>,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| at_stage("report")(Error::Json(e)))
}

/// Runs the experiment described by `config`.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary, CliError> {
    let kind = config.kind.name();
    let (results, artifacts) = match config.kind {
        ExperimentKind::Simulate => simulate(config)?,
        ExperimentKind::Analyze => analyze(config)?,
        ExperimentKind::Analytic => analytic(config)?,
        ExperimentKind::Pde => pde(config)?,
        ExperimentKind::VerifySpecfun => verify_specfun(config)?,
        ExperimentKind::Reproduce => {
            let (report, files) = run_recipe(config)?;
            (to_value(&report)?, files)
        }
    };
    Ok(RunSummary { kind, results, artifacts })
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    n_samples: usize,
    n_censored: usize,
    t_max: Option<f64>,
    mean_uncensored: Option<f64>,
    outcomes_sha256: String,
}

fn simulate(config: &ExperimentConfig) -> Result<(Value, Vec<PathBuf>), CliError> {
    let mut out = RunOutput::new(config, None)?;
    let data = simulate_batch(&config.params, &config.rate, &config.sim).map_err(at_stage("simulate"))?;
    out.dataset("dataset", &data)?;
    let times = data.uncensored_times();
    let summary = SimulationSummary {
        n_samples: data.len(),
        n_censored: data.n_censored(),
        t_max: data.config.t_max,
        mean_uncensored: (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64),
        outcomes_sha256: data.digest(),
    };
    out.report("summary", config, &summary)?;
    Ok((to_value(&summary)?, out.into_artifacts()))
}

#[derive(Debug, Serialize)]
struct AnalysisSummary {
    n_samples: usize,
    n_censored: usize,
    bin_width: f64,
    power: Option<LineFit>,
    exponential: Option<LineFit>,
    tail: Option<TailReport>,
    notes: Vec<String>,
}

fn analyze(config: &ExperimentConfig) -> Result<(Value, Vec<PathBuf>), CliError> {
    let input = config.input.as_ref().ok_or_else(|| CliError::Config("analyze needs --input".into()))?;
    let bytes = std::fs::read(input).map_err(|e| at_stage("read input")(Error::Io(e)))?;
    let data = WaitingTimeDataset::read(input).map_err(at_stage("read input"))?;
    let mut out = RunOutput::new(config, Some(sha256_hex(&bytes)))?;
    let a = &config.analysis;
    let mut notes = Vec::new();

    let h = histogram_pdf(&data, a.bin_width).map_err(at_stage("histogram"))?;
    out.text("histogram.csv", &h.to_csv(out.provenance()))?;
    let curve = survival_curve(&data);
    let t_end = curve.times.last().copied().unwrap_or(0.0);
    let points = curve.on_bins_until(a.bin_width, t_end);
    out.text("survival.csv", &SurvivalCurve::points_to_csv(&points, out.provenance()))?;
    let positive: Vec<(f64, f64)> = points.iter().copied().filter(|&(t, s)| t > 0.0 && s > 0.0).collect();

    let mut fit = |w: Option<[f64; 2]>, label: &str, f: fn(&[(f64, f64)], (f64, f64)) -> kol_core::Result<LineFit>| {
        w.and_then(|[lo, hi]| match f(&positive, (lo, hi)) {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("{label}: {e}"));
                None
            }
        })
    };
    let power = fit(a.power_window, "power fit", fit_power_law);
    let exponential = fit(a.exponential_window, "exponential fit", fit_exponential_tail);
    let tail = match detect_transition(&curve, &a.transition) {
        Ok(r) => Some(r),
        Err(e) => {
            notes.push(format!("transition: {e}"));
            None
        }
    };
    let summary = AnalysisSummary {
        n_samples: data.len(),
        n_censored: data.n_censored(),
        bin_width: a.bin_width,
        power,
        exponential,
        tail,
        notes,
    };
    out.report("analysis", config, &summary)?;
    Ok((to_value(&summary)?, out.into_artifacts()))
}

#[derive(Debug, Serialize)]
struct AnalyticPoint {
    t: f64,
    density: Option<f64>,
    survival: Option<f64>,
    errors: Vec<String>,
}

fn analytic(config: &ExperimentConfig) -> Result<(Value, Vec<PathBuf>), CliError> {
    let mut out = RunOutput::new(config, None)?;
    let model = LaplaceModel::for_rate(config.params.eps, &config.rate).map_err(|e| CliError::Config(e.to_string()))?;
    let s_grid = crate::config::log_grid(1e-4, 1e2, 61);
    let mut rows = Vec::new();
    for &s in &s_grid {
        let v = model.n_hat(s).map_err(at_stage("transform"))?;
        rows.push(format!("{s},{v}"));
    }
    out.text("transform.csv", &csv_document(out.provenance(), &["s", "n_hat"], rows))?;

    let a = &config.analysis;
    let mut points = Vec::new();
    for &t in &a.times {
        let mut errors = Vec::new();
        let density = inverse_laplace(&model.density_transform(), t, &a.density_inversion)
            .map_err(|e| errors.push(format!("density: {e}")))
            .ok()
            .map(|r| r.value);
        let survival = inverse_laplace(&model.survival_transform(), t, &a.density_inversion)
            .map_err(|e| errors.push(format!("survival: {e}")))
            .ok()
            .map(|r| r.value);
        points.push(AnalyticPoint { t, density, survival, errors });
    }
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let rows = points.iter().map(|p| format!("{},{},{}", p.t, fmt(p.density), fmt(p.survival)));
    out.text("inverse.csv", &csv_document(out.provenance(), &["t", "n", "S"], rows))?;
    out.report("analytic", config, &points)?;
    Ok((to_value(&points)?, out.into_artifacts()))
}

#[derive(Debug, Serialize)]
struct PdeSummary {
    grid: FPGrid,
    final_time: f64,
    final_survival: f64,
    max_mass_residual: f64,
    max_boundary_mass: f64,
    boundary_adequate: bool,
    min_density: f64,
}

/// Grid used by `pde`: the configured one, or the default domain for the
/// drift strength run to `sim.t_max` (100 when unset).
pub fn pde_grid(config: &ExperimentConfig) -> FPGrid {
    config.grid.clone().unwrap_or_else(|| FPGrid::default_for(&config.params, config.sim.t_max.unwrap_or(100.0)))
}

fn pde(config: &ExperimentConfig) -> Result<(Value, Vec<PathBuf>), CliError> {
    let grid = pde_grid(config);
    grid.validate(&config.params).map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = RunOutput::new(config, None)?;
    let sol = solve_fokker_planck(&config.params, &config.rate, &grid).map_err(at_stage("pde"))?;
    out.text("series.csv", &sol.to_csv(out.provenance()))?;
    if !sol.snapshots.is_empty() {
        out.text("snapshots.csv", &sol.snapshots_to_csv(out.provenance()))?;
    }
    let summary = PdeSummary {
        final_time: sol.times.last().copied().unwrap_or(0.0),
        final_survival: sol.survival.last().copied().unwrap_or(1.0),
        max_mass_residual: sol.max_mass_residual,
        max_boundary_mass: sol.max_boundary_mass,
        boundary_adequate: sol.boundary_adequate,
        min_density: sol.min_density,
        grid,
    };
    out.report("pde", config, &summary)?;
    Ok((to_value(&summary)?, out.into_artifacts()))
}

#[derive(Debug, Serialize)]
struct SpecfunSummary {
    passed: bool,
    checks: Vec<IdentityCheck>,
}

fn verify_specfun(config: &ExperimentConfig) -> Result<(Value, Vec<PathBuf>), CliError> {
    let mut out = RunOutput::new(config, None)?;
    let policy = AccuracyPolicy::default();
    let checks = identity_checks(&policy).map_err(at_stage("verify-specfun"))?;
    let table = validation_table(&policy).map_err(at_stage("verify-specfun"))?;
    let rows = table.iter().map(|(f, a, x, v)| format!("{f},{a},{x},{v}"));
    out.text("values.csv", &csv_document(out.provenance(), &["function", "a", "x", "value"], rows))?;
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let summary = SpecfunSummary { passed: failed.is_empty(), checks };
    out.report("checks", config, &summary)?;
    if !failed.is_empty() {
        return Err(CliError::Runtime {
            stage: "verify-specfun".into(),
            source: Error::Accuracy { what: format!("failed identities: {}", failed.join(", ")), partial: f64::NAN },
        });
    }
    Ok((to_value(&summary)?, out.into_artifacts()))
}
