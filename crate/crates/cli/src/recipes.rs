//! Reproduction recipes: each simulates or evaluates what it needs, fits
//! the configured windows and writes plot-ready CSV files plus a JSON
//! report.

use kol_core::analytic::{inverse_laplace, n0_intermediate, IntermediateTransform, LaplaceModel};
use kol_core::sde::{simulate_batch, OUParams, WaitingTimeDataset};
use kol_core::stats::{
    detect_transition, fit_exponential_tail, fit_power_law, histogram_pdf, survival_curve, LineFit, SurvivalCurve,
    TailReport,
};
use kol_core::Error;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Recipe};
use crate::output::RunOutput;
use crate::{at_stage, CliError};

/// Drift strengths of the tail table that need hours per row at `Δt = 10⁻³`
/// and are therefore only run on request.
pub const LONG_RUNNING_EPS: [f64; 3] = [2.5e-4, 6.25e-5, 1.5625e-5];

/// Report and files of one recipe run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "kebab-case")]
pub enum RecipeReport {
    ZeroDriftDensity(DensitySlopeReport),
    SurvivalSweep(SurvivalSweepReport),
    TailTable(TailTableReport),
    AnalyticRegimes(AnalyticRegimesReport),
    SurvivalBound(SurvivalBoundReport),
}

fn window(w: Option<[f64; 2]>, name: &str) -> Result<(f64, f64), CliError> {
    w.map(|[a, b]| (a, b)).ok_or_else(|| CliError::Config(format!("this recipe needs analysis.{name}")))
}

fn simulate(config: &ExperimentConfig, eps: f64, stage: &str) -> Result<WaitingTimeDataset, CliError> {
    let params = OUParams::new(eps, config.params.x0).map_err(|e| CliError::Config(e.to_string()))?;
    simulate_batch(&params, &config.rate, &config.sim).map_err(at_stage(stage))
}

fn eps_label(eps: f64) -> String {
    format!("eps{eps:e}")
}

/// Runs the recipe named in `config.recipe`.
pub fn run_recipe(config: &ExperimentConfig) -> Result<(RecipeReport, Vec<std::path::PathBuf>), CliError> {
    let recipe = config.recipe.ok_or_else(|| CliError::Config("reproduce needs a recipe".into()))?;
    let mut out = RunOutput::new(config, None)?;
    let report = match recipe {
        Recipe::ZeroDriftDensity => RecipeReport::ZeroDriftDensity(zero_drift_density(config, &mut out)?),
        Recipe::SurvivalSweep => RecipeReport::SurvivalSweep(survival_sweep(config, &mut out)?),
        Recipe::TailTable => RecipeReport::TailTable(tail_table(config, &mut out)?),
        Recipe::AnalyticRegimes => RecipeReport::AnalyticRegimes(analytic_regimes(config, &mut out)?),
        Recipe::SurvivalBound => RecipeReport::SurvivalBound(survival_bound(config, &mut out)?),
    };
    out.report("report", config, &report)?;
    Ok((report, out.into_artifacts()))
}

/// Power-law fit of the zero-drift histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySlopeReport {
    pub n_samples: usize,
    pub n_censored: usize,
    pub bin_width: f64,
    pub power_window: [f64; 2],
    /// Fit of `ln(density)` against `ln(bin midpoint)`.
    pub power: LineFit,
    /// Fit of `ln(N_i/total)` against `ln(w·i + 1)`, the left-edge
    /// abscissa shifted by one.
    pub offset_power: Option<LineFit>,
    pub reference_slope: f64,
}

pub fn zero_drift_density(config: &ExperimentConfig, out: &mut RunOutput) -> Result<DensitySlopeReport, CliError> {
    let win = window(config.analysis.power_window, "power_window")?;
    let data = simulate(config, config.params.eps, "simulate")?;
    out.dataset("dataset", &data)?;
    let h = histogram_pdf(&data, config.analysis.bin_width).map_err(at_stage("histogram"))?;
    out.text("histogram.csv", &h.to_csv(out.provenance()))?;
    let power = fit_power_law(&h.midpoint_points(), win).map_err(at_stage("fit"))?;
    Ok(DensitySlopeReport {
        n_samples: data.len(),
        n_censored: data.n_censored(),
        bin_width: h.bin_width,
        power_window: [win.0, win.1],
        power,
        offset_power: fit_power_law(&h.offset_points(), win).ok(),
        reference_slope: -1.5,
    })
}

/// Log-log survival slope for one drift strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub n_censored: usize,
    pub power: Option<LineFit>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSweepReport {
    pub bin_width: f64,
    pub power_window: [f64; 2],
    pub rows: Vec<SweepRow>,
    pub reference_slope: f64,
}

fn survival_points(curve: &SurvivalCurve, w: f64, t_end: f64) -> Vec<(f64, f64)> {
    curve.on_bins_until(w, t_end).into_iter().filter(|&(t, s)| t > 0.0 && s > 0.0).collect()
}

pub fn survival_sweep(config: &ExperimentConfig, out: &mut RunOutput) -> Result<SurvivalSweepReport, CliError> {
    let win = window(config.analysis.power_window, "power_window")?;
    let w = config.analysis.bin_width;
    let mut rows = Vec::new();
    for eps in config.drift_strengths() {
        let label = eps_label(eps);
        let data = simulate(config, eps, &format!("simulate {label}"))?;
        out.dataset(&format!("{label}.dataset"), &data)?;
        let curve = survival_curve(&data);
        let t_end = curve.times.last().copied().unwrap_or(0.0);
        let points = curve.on_bins_until(w, t_end);
        out.text(&format!("{label}.survival.csv"), &SurvivalCurve::points_to_csv(&points, out.provenance()))?;
        let fit = fit_power_law(&survival_points(&curve, w, win.1 + w), win);
        rows.push(SweepRow {
            eps,
            n_censored: data.n_censored(),
            fit_error: fit.as_ref().err().map(|e| e.to_string()),
            power: fit.ok(),
        });
    }
    Ok(SurvivalSweepReport { bin_width: w, power_window: [win.0, win.1], rows, reference_slope: -0.5 })
}

/// One row of the tail table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub eps: f64,
    pub n_censored: usize,
    pub tail: TailReport,
    /// Exponential fit on `analysis.exponential_window`, when configured.
    pub fixed_exponential: Option<LineFit>,
}

impl TailRow {
    pub fn exponential_slope(&self) -> Option<f64> {
        self.tail.exponential.map(|e| e.slope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTableReport {
    pub rows: Vec<TailRow>,
    pub long_running_eps: Vec<f64>,
}

pub fn tail_table(config: &ExperimentConfig, out: &mut RunOutput) -> Result<TailTableReport, CliError> {
    let opts = &config.analysis.transition;
    let mut rows = Vec::new();
    for eps in config.drift_strengths() {
        let label = eps_label(eps);
        let data = simulate(config, eps, &format!("simulate {label}"))?;
        out.dataset(&format!("{label}.dataset"), &data)?;
        let curve = survival_curve(&data);
        let t_end = curve.times.last().copied().unwrap_or(0.0);
        let points = curve.on_bins_until(config.analysis.bin_width, t_end);
        out.text(&format!("{label}.survival.csv"), &SurvivalCurve::points_to_csv(&points, out.provenance()))?;
        let tail = detect_transition(&curve, opts).map_err(at_stage(format!("transition {label}")))?;
        let fixed_exponential = match config.analysis.exponential_window {
            Some([a, b]) => Some(
                fit_exponential_tail(&survival_points(&curve, config.analysis.bin_width, b), (a, b))
                    .map_err(at_stage(format!("exponential fit {label}")))?,
            ),
            None => None,
        };
        rows.push(TailRow { eps, n_censored: data.n_censored(), tail, fixed_exponential });
    }
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let table = kol_core::output::csv_document(
        out.provenance(),
        &[
            "eps",
            "exponential_slope",
            "slope_over_minus_eps",
            "transition",
            "transition_times_eps",
            "power_slope",
            "exponential_residual",
            "detected",
        ],
        rows.iter().map(|r| {
            let e = r.tail.exponential;
            format!(
                "{},{},{},{},{},{},{},{}",
                r.eps,
                fmt(e.map(|e| e.slope)),
                fmt(e.map(|e| -e.slope / r.eps)),
                fmt(r.tail.transition),
                fmt(r.tail.transition.map(|t| t * r.eps)),
                fmt(r.tail.power.map(|p| p.slope)),
                fmt(e.map(|e| e.residual)),
                r.tail.detected
            )
        }),
    );
    out.text("table.csv", &table)?;
    Ok(TailTableReport { rows, long_running_eps: LONG_RUNNING_EPS.to_vec() })
}

/// Numerical inversion compared with a closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionCheck {
    pub t: f64,
    pub inverted: f64,
    pub closed_form: f64,
    pub relative_error: f64,
}

/// Inverse transform value, or the failure and any partial value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedValue {
    pub t: f64,
    pub value: Option<f64>,
    pub partial: Option<f64>,
    pub error: Option<String>,
}

fn invert_density(model: &LaplaceModel, t: f64, policy: &kol_core::analytic::InversionPolicy) -> InvertedValue {
    match inverse_laplace(&model.density_transform(), t, policy) {
        Ok(r) => InvertedValue { t, value: Some(r.value), partial: None, error: None },
        Err(Error::Accuracy { what, partial }) => {
            InvertedValue { t, value: None, partial: Some(partial), error: Some(what) }
        }
        Err(e) => InvertedValue { t, value: None, partial: None, error: Some(e.to_string()) },
    }
}

/// `d ln n / dt` between two inverted values, when both are positive.
fn log_slope(a: &InvertedValue, b: &InvertedValue) -> Option<f64> {
    match (a.value, b.value) {
        (Some(x), Some(y)) if x > 0.0 && y > 0.0 => Some((y.ln() - x.ln()) / (b.t - a.t)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRegimesReport {
    /// `t^{3/2}·n₀(t)` at both ends of `analysis.power_window`.
    pub scaled_density: [f64; 2],
    pub scaled_window: [f64; 2],
    /// `|ratio - 1|` of the two scaled values.
    pub scaled_variation: f64,
    pub inversion: Vec<InversionCheck>,
    pub eps: f64,
    /// Inverse of `n̂(·; ε)` at `2/ε²` and `3/ε²`.
    pub long_time: Vec<InvertedValue>,
    /// `d ln n/dt` between the two long-time values.
    pub long_time_log_slope: Option<f64>,
    /// Inverse of `n̂(·; ε)` at `3/ε` and `6/ε`, where the inversion is
    /// well conditioned.
    pub moderate_time: Vec<InvertedValue>,
    pub moderate_time_log_slope: Option<f64>,
}

pub fn analytic_regimes(config: &ExperimentConfig, out: &mut RunOutput) -> Result<AnalyticRegimesReport, CliError> {
    let (ta, tb) = window(config.analysis.power_window, "power_window")?;
    let scaled = |t: f64| -> Result<f64, CliError> { Ok(t.powf(1.5) * n0_intermediate(t).map_err(at_stage("n0"))?) };
    let (sa, sb) = (scaled(ta)?, scaled(tb)?);
    let mut inversion = Vec::new();
    for &t in &config.analysis.times {
        let r = inverse_laplace(&IntermediateTransform, t, &config.analysis.inversion).map_err(at_stage("inversion"))?;
        let exact = n0_intermediate(t).map_err(at_stage("n0"))?;
        inversion.push(InversionCheck {
            t,
            inverted: r.value,
            closed_form: exact,
            relative_error: ((r.value - exact) / exact).abs(),
        });
    }
    let eps = config.params.eps;
    let model = LaplaceModel::new(eps).map_err(|e| CliError::Config(e.to_string()))?;
    let policy = &config.analysis.density_inversion;
    let long_time: Vec<InvertedValue> =
        [2.0, 3.0].iter().map(|k| invert_density(&model, k / (eps * eps), policy)).collect();
    let moderate_time: Vec<InvertedValue> = [3.0, 6.0].iter().map(|k| invert_density(&model, k / eps, policy)).collect();

    let grid = crate::config::log_grid(0.1, 1e4, 81);
    let mut rows = Vec::new();
    for &t in &grid {
        let n0 = n0_intermediate(t).map_err(at_stage("n0"))?;
        rows.push(format!("{t},{n0},{}", t.powf(1.5) * n0));
    }
    out.text("intermediate.csv", &kol_core::output::csv_document(out.provenance(), &["t", "n0", "t15_n0"], rows))?;

    Ok(AnalyticRegimesReport {
        scaled_density: [sa, sb],
        scaled_window: [ta, tb],
        scaled_variation: (sb / sa - 1.0).abs(),
        inversion,
        eps,
        long_time_log_slope: log_slope(&long_time[0], &long_time[1]),
        long_time,
        moderate_time_log_slope: log_slope(&moderate_time[0], &moderate_time[1]),
        moderate_time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalBoundReport {
    pub eps: f64,
    pub x0: f64,
    pub alpha: f64,
    pub window: [f64; 2],
    pub n_samples: usize,
    /// Smallest `S(t) / (t^{-1/2-α}/2)` on the checked grid.
    pub min_ratio: f64,
    pub min_ratio_at: f64,
    pub holds: bool,
}

pub fn survival_bound(config: &ExperimentConfig, out: &mut RunOutput) -> Result<SurvivalBoundReport, CliError> {
    let (a, b) = window(config.analysis.bound_window, "bound_window")?;
    let alpha = config.analysis.alpha;
    let data = simulate(config, config.params.eps, "simulate")?;
    out.dataset("dataset", &data)?;
    let curve = survival_curve(&data);
    let step = config.analysis.bin_width;
    let n = ((b - a) / step).round() as usize;
    let mut rows = Vec::new();
    let (mut min_ratio, mut min_at) = (f64::INFINITY, a);
    for i in 0..=n {
        let t = (a + step * i as f64).min(b);
        let s = curve.at(t);
        let bound = 0.5 * t.powf(-0.5 - alpha);
        if s / bound < min_ratio {
            (min_ratio, min_at) = (s / bound, t);
        }
        rows.push(format!("{t},{s},{bound}"));
    }
    out.text("bound.csv", &kol_core::output::csv_document(out.provenance(), &["t", "survival", "bound"], rows))?;
    Ok(SurvivalBoundReport {
        eps: config.params.eps,
        x0: config.params.x0,
        alpha,
        window: [a, b],
        n_samples: data.len(),
        min_ratio,
        min_ratio_at: min_at,
        holds: min_ratio >= 1.0,
    })
}
