//! Monte Carlo sampler for the killed Ornstein–Uhlenbeck state.
//!
//! Each sample draws an `Exp(1)` threshold `Γ`, then advances
//! `X_{k+1} = X_k - εX_kΔt + √2ΔB_k` and `I_{k+1} = I_k + Λ(X_{k+1})Δt`
//! until `I_{k+1} >= Γ`, reporting `τ = (k+1)Δt`, or until the censoring
//! horizon is reached. Randomness comes from a Philox stream keyed by the
//! master seed and the sample index, so a batch is bit-identical for any
//! worker count.

mod dataset;
mod philox;

pub use dataset::{WaitingTimeDataset, WaitingTimeOutcome, DATASET_SCHEMA_VERSION};
pub use philox::{philox4x64, SampleStream};

use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::{validate_rate, RateSpec};

/// Diffusion amplitude of the state equation.
pub const DIFFUSION: f64 = std::f64::consts::SQRT_2;

/// Drift strength and initial state of `dX = -εX dt + √2 dB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OUParams {
    pub eps: f64,
    #[serde(default)]
    pub x0: f64,
}

impl OUParams {
    pub fn new(eps: f64, x0: f64) -> Result<Self> {
        let p = Self { eps, x0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::Config(format!("eps must be finite and >= 0, got {}", self.eps)));
        }
        if !self.x0.is_finite() {
            return Err(Error::Config(format!("x0 must be finite, got {}", self.x0)));
        }
        Ok(())
    }
}

/// Step size, sample count, censoring horizon, seed and parallelism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub n_samples: u64,
    /// Censoring horizon; `None` means `10/ε`, or `10⁷·Δt` when `ε = 0`.
    pub t_max: Option<f64>,
    pub seed: u64,
    /// Worker threads; `None` uses every available core. Results do not
    /// depend on it.
    pub workers: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1e-3, n_samples: 100_000, t_max: None, seed: 0, workers: None }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_samples < 1 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if let Some(t) = self.t_max {
            if !(t >= self.dt) || !t.is_finite() {
                return Err(Error::Config(format!("t_max must be finite and >= dt, got {t}")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// The censoring horizon actually used for `params`.
    pub fn resolved_t_max(&self, params: &OUParams) -> f64 {
        match self.t_max {
            Some(t) => t,
            None if params.eps > 0.0 => 10.0 / params.eps,
            None => 1e7 * self.dt,
        }
    }

    /// Smallest step count `k` with `k·Δt >= t_max`.
    fn max_steps(&self, t_max: f64) -> u64 {
        let mut k = (t_max / self.dt).ceil().max(1.0) as u64;
        while k > 1 && (k - 1) as f64 * self.dt >= t_max {
            k -= 1;
        }
        while (k as f64) * self.dt < t_max {
            k += 1;
        }
        k
    }
}

/// One Euler–Maruyama step `x - εxΔt + √2ΔB`.
#[inline(always)]
pub fn em_step(x: f64, eps: f64, dt: f64, db: f64) -> f64 {
    x - eps * x * dt + DIFFUSION * db
}

/// One clock update `I + Λ·Δt`, with `Λ` taken at the updated state.
#[inline(always)]
pub fn clock_step(accumulated: f64, rate: f64, dt: f64) -> f64 {
    accumulated + rate * dt
}

/// Exact OU transition: `e^{-εt}x₀ + √((1 - e^{-2εt})/ε)·z`, with the
/// `ε → 0` limit variance `2t`.
pub fn ou_exact_transition(x0: f64, eps: f64, t: f64, draw: f64) -> Result<f64> {
    if !(eps >= 0.0) || !(t > 0.0) || !x0.is_finite() || !draw.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("ou_exact_transition needs eps >= 0, t > 0, got eps={eps}, t={t}")));
    }
    let var = if eps == 0.0 { 2.0 * t } else { -(-2.0 * eps * t).exp_m1() / eps };
    Ok((-eps * t).exp() * x0 + var.sqrt() * draw)
}

/// Euler–Maruyama endpoint after `steps` steps, without the clock.
pub fn em_endpoint(params: &OUParams, dt: f64, steps: u64, stream: &mut SampleStream) -> f64 {
    let sqrt_dt = dt.sqrt();
    let mut x = params.x0;
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(stream);
        x = em_step(x, params.eps, dt, sqrt_dt * z);
    }
    x
}

/// Simulates one waiting time from `stream`, which must be fresh.
pub fn sample_waiting_time(
    params: &OUParams,
    rate: &RateSpec,
    cfg: &SimConfig,
    stream: &mut SampleStream,
) -> Result<WaitingTimeOutcome> {
    let t_max = cfg.resolved_t_max(params);
    let k_max = cfg.max_steps(t_max);
    match *rate {
        RateSpec::PiecewiseConstant { level } => {
            run_sample(params, cfg.dt, t_max, k_max, stream, |x| if x >= 0.0 { level } else { 0.0 })
        }
        _ => run_sample(params, cfg.dt, t_max, k_max, stream, |x| rate.eval(x)),
    }
}

#[inline(always)]
fn run_sample<F: Fn(f64) -> f64>(
    params: &OUParams,
    dt: f64,
    t_max: f64,
    k_max: u64,
    stream: &mut SampleStream,
    rate: F,
) -> Result<WaitingTimeOutcome> {
    let index = stream.sample();
    let gamma: f64 = Exp1.sample(stream);
    let sqrt_dt = dt.sqrt();
    let eps = params.eps;
    let mut x = params.x0;
    let mut clock = 0.0;
    for k in 1..=k_max {
        let z: f64 = StandardNormal.sample(stream);
        x = em_step(x, eps, dt, sqrt_dt * z);
        if !x.is_finite() {
            return Err(Error::Simulation { sample: index, step: k, reason: format!("state became {x}") });
        }
        clock = clock_step(clock, rate(x), dt);
        if clock >= gamma {
            return Ok(WaitingTimeOutcome { index, tau: k as f64 * dt, censored: false, steps: k });
        }
    }
    Ok(WaitingTimeOutcome { index, tau: t_max, censored: true, steps: k_max })
}

/// Simulates `cfg.n_samples` independent waiting times in parallel.
///
/// Sample `i` always uses stream `(cfg.seed, i)`, and the outcomes are
/// ordered by index. On failure the error of the lowest failing index is
/// returned.
pub fn simulate_batch(params: &OUParams, rate: &RateSpec, cfg: &SimConfig) -> Result<WaitingTimeDataset> {
    params.validate()?;
    cfg.validate()?;
    validate_rate(rate)?;
    let workers = cfg.workers.unwrap_or_else(default_workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<Result<WaitingTimeOutcome>> = pool.install(|| {
        (0..cfg.n_samples as usize)
            .into_par_iter()
            .with_min_len(64)
            .map(|i| sample_waiting_time(params, rate, cfg, &mut SampleStream::new(cfg.seed, i as u64)))
            .collect()
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let recorded = SimConfig { t_max: Some(cfg.resolved_t_max(params)), workers: None, ..*cfg };
    Ok(WaitingTimeDataset::new(outcomes, *params, rate.clone(), recorded))
}

/// Number of hardware threads, at least one.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
