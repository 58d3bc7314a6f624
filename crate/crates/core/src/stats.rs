//! Empirical waiting-time statistics: binned densities, survival curves,
//! power-law and exponential tail fits, transition detection and the
//! Kolmogorov–Smirnov distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::{csv_document, Provenance};
use crate::sde::WaitingTimeDataset;

/// Fixed-width binned density of the uncensored waiting times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramPDF {
    pub bin_width: f64,
    /// Counts of bins `[w·i, w·(i+1))`, from 0 to the largest uncensored time.
    pub counts: Vec<u64>,
    /// All outcomes, censored ones included.
    pub total: u64,
    /// `counts / (total · bin_width)`.
    pub densities: Vec<f64>,
}

impl HistogramPDF {
    pub fn bin_left(&self, i: usize) -> f64 {
        self.bin_width * i as f64
    }

    pub fn bin_mid(&self, i: usize) -> f64 {
        self.bin_width * (i as f64 + 0.5)
    }

    /// Binomial standard error of each density.
    pub fn standard_errors(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                (p * (1.0 - p) / n).sqrt() / self.bin_width
            })
            .collect()
    }

    /// `(w·i + 1, N_i / total)` for non-empty bins: left edges shifted by one
    /// so that the first bin has a finite logarithm.
    pub fn offset_points(&self) -> Vec<(f64, f64)> {
        self.nonempty().map(|i| (self.bin_left(i) + 1.0, self.counts[i] as f64 / self.total as f64)).collect()
    }

    /// `(bin midpoint, density)` for non-empty bins.
    pub fn midpoint_points(&self) -> Vec<(f64, f64)> {
        self.nonempty().map(|i| (self.bin_mid(i), self.densities[i])).collect()
    }

    fn nonempty(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.counts.len()).filter(|&i| self.counts[i] > 0)
    }

    /// CSV with one row per bin: left edge, midpoint, count, density, error.
    pub fn to_csv(&self, provenance: &Provenance) -> String {
        let se = self.standard_errors();
        let rows = (0..self.counts.len()).map(|i| {
            format!("{},{},{},{},{}", self.bin_left(i), self.bin_mid(i), self.counts[i], self.densities[i], se[i])
        });
        csv_document(provenance, &["t_left", "t_mid", "count", "density", "std_err"], rows)
    }
}

/// Bins the uncensored waiting times with width `bin_width`.
pub fn histogram_pdf(data: &WaitingTimeDataset, bin_width: f64) -> Result<HistogramPDF> {
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(Error::Domain(format!("bin width must be positive, got {bin_width}")));
    }
    let times = data.uncensored_times();
    let max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if times.is_empty() {
        return Err(Error::EmptyEstimate("no uncensored waiting times to bin".into()));
    }
    let n_bins = (max / bin_width).floor() as usize + 1;
    let mut counts = vec![0u64; n_bins];
    for t in times {
        counts[((t / bin_width).floor() as usize).min(n_bins - 1)] += 1;
    }
    let total = data.len() as u64;
    let densities = counts.iter().map(|&c| c as f64 / (total as f64 * bin_width)).collect();
    Ok(HistogramPDF { bin_width, counts, total, densities })
}

/// Freedman–Diaconis bin width `2·IQR·n^{-1/3}` of the uncensored times.
pub fn freedman_diaconis_width(data: &WaitingTimeDataset) -> Result<f64> {
    let mut t = data.uncensored_times();
    if t.len() < 4 {
        return Err(Error::InsufficientData("need at least 4 uncensored times".into()));
    }
    t.sort_by(f64::total_cmp);
    let q = |p: f64| t[((t.len() - 1) as f64 * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    if !(iqr > 0.0) {
        return Err(Error::InsufficientData("interquartile range is zero".into()));
    }
    Ok(2.0 * iqr / (t.len() as f64).cbrt())
}

/// Survival function `S(t) = P(T >= t)`, either empirical
/// (`#{τ >= t} / total`, censored outcomes surviving at every `t`) or
/// tabulated on a time grid and interpolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    /// Distinct uncensored times (empirical) or grid times (tabulated),
    /// increasing.
    pub times: Vec<f64>,
    /// `S` at each entry of `times`.
    pub survival: Vec<f64>,
    /// Sample count; zero for a tabulated curve.
    pub total: u64,
    pub n_censored: u64,
    /// Censoring horizon when any outcome is censored.
    pub horizon: Option<f64>,
    sorted: Vec<f64>,
    tabulated: bool,
}

impl SurvivalCurve {
    /// A deterministic curve through `(times[i], survival[i])`.
    pub fn from_table(times: Vec<f64>, survival: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != survival.len() {
            return Err(Error::InsufficientData("survival table needs matching, nonempty columns".into()));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) || !survival.iter().all(|s| (0.0..=1.0).contains(s)) {
            return Err(Error::Domain("survival table needs increasing times and values in [0, 1]".into()));
        }
        Ok(Self { times, survival, total: 0, n_censored: 0, horizon: None, sorted: Vec::new(), tabulated: true })
    }

    fn is_tabulated(&self) -> bool {
        self.tabulated
    }

    /// Whether part of the mass is right-censored.
    pub fn has_censored_mass(&self) -> bool {
        self.n_censored > 0
    }

    /// `S(t)`. An empirical curve equals 1 for `t <= 0` and stays at the
    /// censored fraction beyond the horizon; a tabulated one is clamped to
    /// its end values.
    pub fn at(&self, t: f64) -> f64 {
        if self.is_tabulated() {
            let i = self.times.partition_point(|&x| x <= t);
            if i == 0 {
                return self.survival[0];
            }
            if i == self.times.len() {
                return self.survival[i - 1];
            }
            let (t0, t1) = (self.times[i - 1], self.times[i]);
            let (s0, s1) = (self.survival[i - 1], self.survival[i]);
            return s0 + (s1 - s0) * (t - t0) / (t1 - t0);
        }
        let below = self.sorted.partition_point(|&x| x < t);
        (self.total - below as u64) as f64 / self.total as f64
    }

    /// `(w·i, S(w·i))` for `i = 0, 1, ...` up to the last uncensored time.
    pub fn on_bins(&self, bin_width: f64) -> Vec<(f64, f64)> {
        let end = if self.is_tabulated() { self.times.last() } else { self.sorted.last() };
        self.on_bins_until(bin_width, end.copied().unwrap_or(0.0))
    }

    /// `(w·i, S(w·i))` for `w·i <= t_end`.
    pub fn on_bins_until(&self, bin_width: f64, t_end: f64) -> Vec<(f64, f64)> {
        let n = (t_end / bin_width).floor() as usize + 1;
        (0..n).map(|i| bin_width * i as f64).map(|t| (t, self.at(t))).collect()
    }

    /// Largest observed time at which `S >= level`.
    pub fn last_time_above(&self, level: f64) -> Option<f64> {
        if self.is_tabulated() {
            let i = self.survival.partition_point(|&s| s >= level);
            return i.checked_sub(1).map(|i| self.times[i]);
        }
        let allowed = (self.total as f64 * (1.0 - level)).floor() as usize;
        self.sorted.get(allowed.min(self.sorted.len().checked_sub(1)?)).copied()
    }

    pub fn points_to_csv(points: &[(f64, f64)], provenance: &Provenance) -> String {
        csv_document(provenance, &["t", "survival"], points.iter().map(|(t, s)| format!("{t},{s}")))
    }
}

pub fn survival_curve(data: &WaitingTimeDataset) -> SurvivalCurve {
    let mut sorted = data.uncensored_times();
    sorted.sort_by(f64::total_cmp);
    let total = data.len() as u64;
    let n_censored = data.n_censored() as u64;
    let mut times = Vec::new();
    let mut survival = Vec::new();
    for (i, &t) in sorted.iter().enumerate() {
        if i == 0 || t != sorted[i - 1] {
            times.push(t);
            survival.push((total - i as u64) as f64 / total as f64);
        }
    }
    let horizon = data.outcomes.iter().filter(|o| o.censored).map(|o| o.tau).reduce(f64::max);
    SurvivalCurve { times, survival, total, n_censored, horizon, sorted, tabulated: false }
}

/// A least-squares line with its window and RMS residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation of `ln y` from the line.
    pub residual: f64,
    pub n_points: usize,
    /// Time window `[t_a, t_b]` the fit was restricted to.
    pub window: (f64, f64),
}

fn least_squares(xy: &[(f64, f64)], window: (f64, f64)) -> Result<LineFit> {
    let n = xy.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!("{n} points in window, need at least 5")));
    }
    let nf = n as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(LineFit { slope, intercept, residual: (sse / nf).sqrt(), n_points: n, window })
}

fn in_window(points: &[(f64, f64)], window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (a, b) = window;
    if !(a < b) {
        return Err(Error::Domain(format!("empty fit window [{a}, {b}]")));
    }
    let sel: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 >= a && p.0 <= b).collect();
    if let Some(p) = sel.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::Domain(format!("nonpositive value {} at t = {}", p.1, p.0)));
    }
    Ok(sel)
}

/// Fits `ln y = slope·ln t + intercept` to the points with `t` in `window`.
pub fn fit_power_law(points: &[(f64, f64)], window: (f64, f64)) -> Result<LineFit> {
    if !(window.0 > 0.0) {
        return Err(Error::Domain(format!("power-law window must start above 0, got {}", window.0)));
    }
    let sel = in_window(points, window)?;
    least_squares(&sel.iter().map(|p| (p.0.ln(), p.1.ln())).collect::<Vec<_>>(), window)
}

/// Fits `ln y = slope·t + intercept` to the points with `t` in `window`.
pub fn fit_exponential_tail(points: &[(f64, f64)], window: (f64, f64)) -> Result<LineFit> {
    let sel = in_window(points, window)?;
    least_squares(&sel.iter().map(|p| (p.0, p.1.ln())).collect::<Vec<_>>(), window)
}

/// Settings for [`detect_transition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionOptions {
    /// Spacing of the evaluation grid `t = w·i`.
    pub bin_width: f64,
    /// Smallest time used; defaults to one bin width.
    pub t_low: Option<f64>,
    /// Points with `S` below this are too noisy to fit and are dropped.
    pub survival_floor: f64,
    /// Number of log-spaced split candidates.
    pub candidates: usize,
    /// Relative improvement over the best single-segment fit required to
    /// report a transition.
    pub min_improvement: f64,
}

impl Default for TransitionOptions {
    fn default() -> Self {
        Self { bin_width: 100.0, t_low: None, survival_floor: 1e-3, candidates: 60, min_improvement: 0.05 }
    }
}

/// Two-segment tail description of a survival curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// Power-law segment (whole range when no transition is found and the
    /// power law fits better).
    pub power: Option<LineFit>,
    /// Exponential segment.
    pub exponential: Option<LineFit>,
    pub transition: Option<f64>,
    pub detected: bool,
    /// RMS residuals of the single-segment fits and the best split.
    pub single_power_residual: f64,
    pub single_exponential_residual: f64,
    pub combined_residual: Option<f64>,
    pub n_points: usize,
    pub diagnostics: String,
}

/// Splits the survival curve into a power-law head and an exponential tail
/// by segmented least squares over log-spaced candidate split times.
pub fn detect_transition(curve: &SurvivalCurve, opts: &TransitionOptions) -> Result<TailReport> {
    if !(opts.bin_width > 0.0) || opts.candidates < 1 || !(opts.survival_floor > 0.0) {
        return Err(Error::Config(format!("invalid transition options {opts:?}")));
    }
    let t_low = opts.t_low.unwrap_or(opts.bin_width);
    let t_end = curve
        .last_time_above(opts.survival_floor)
        .ok_or_else(|| Error::InsufficientData("survival curve has no uncensored times".into()))?;
    let points: Vec<(f64, f64)> = curve
        .on_bins_until(opts.bin_width, t_end)
        .into_iter()
        .filter(|&(t, s)| t >= t_low && s >= opts.survival_floor && t > 0.0)
        .collect();
    if points.len() < 10 {
        return Err(Error::InsufficientData(format!("{} usable survival points, need 10", points.len())));
    }
    let t_first = points[0].0;
    let t_last = points[points.len() - 1].0;
    let data_start = curve.times[0].max(t_first);
    if t_last / data_start < 100.0 {
        return Err(Error::InsufficientData(format!(
            "curve spans [{data_start}, {t_last}], less than two decades"
        )));
    }
    let all = (t_first, t_last);
    let single_power = fit_power_law(&points, all)?;
    let single_exp = fit_exponential_tail(&points, all)?;
    let best_single = single_power.residual.min(single_exp.residual);

    let mut best: Option<(f64, LineFit, LineFit, f64)> = None;
    let ratio = t_last / t_first;
    for c in 1..=opts.candidates {
        let split = t_first * ratio.powf(c as f64 / (opts.candidates + 1) as f64);
        let head: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 <= split).collect();
        let tail: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 > split).collect();
        if head.len() < 5 || tail.len() < 5 {
            continue;
        }
        let p = fit_power_law(&head, (head[0].0, head[head.len() - 1].0))?;
        let e = fit_exponential_tail(&tail, (tail[0].0, tail[tail.len() - 1].0))?;
        let n = (p.n_points + e.n_points) as f64;
        let combined = ((p.residual.powi(2) * p.n_points as f64 + e.residual.powi(2) * e.n_points as f64) / n).sqrt();
        if best.as_ref().is_none_or(|b| combined < b.3) {
            best = Some((split, p, e, combined));
        }
    }
    let base = TailReport {
        power: None,
        exponential: None,
        transition: None,
        detected: false,
        single_power_residual: single_power.residual,
        single_exponential_residual: single_exp.residual,
        combined_residual: best.as_ref().map(|b| b.3),
        n_points: points.len(),
        diagnostics: String::new(),
    };
    match best {
        Some((split, p, e, combined)) if combined <= (1.0 - opts.min_improvement) * best_single => Ok(TailReport {
            power: Some(p),
            exponential: Some(e),
            transition: Some(split),
            detected: true,
            diagnostics: format!(
                "split at {split:.6e} lowers the RMS log residual from {best_single:.4e} to {combined:.4e}"
            ),
            ..base
        }),
        _ => {
            let power_wins = single_power.residual <= single_exp.residual;
            Ok(TailReport {
                power: power_wins.then_some(single_power),
                exponential: (!power_wins).then_some(single_exp),
                diagnostics: format!(
                    "no transition detected: no split improves the best single-segment residual {best_single:.4e} by {:.0}%",
                    opts.min_improvement * 100.0
                ),
                ..base
            })
        }
    }
}

/// Sup-norm distance between the empirical CDF of `data` and `cdf`.
pub fn ks_distance(data: &WaitingTimeDataset, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if data.n_censored() > 0 {
        return Err(Error::Unsupported(format!(
            "KS distance needs uncensored data, {} outcomes are censored",
            data.n_censored()
        )));
    }
    ks_distance_of(&data.uncensored_times(), cdf)
}

/// [`ks_distance`] for bare samples.
pub fn ks_distance_of(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyEstimate("KS distance of an empty sample".into()));
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}
