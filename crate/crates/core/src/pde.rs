//! Fokker–Planck solver for the density of the surviving state,
//! `∂f/∂t = ∂x(εxf) + ∂²f/∂x² - Λ(x)f`, giving `N(t) = ∫f dx` and
//! `n(t) = ∫Λf dx` independently of the sampler.
//!
//! Space is discretised by cell-centred finite volumes with exponentially
//! fitted (Scharfetter–Gummel) fluxes, which reduce to central differences
//! for small cell Péclet numbers and to upwinding for large ones. The walls
//! carry zero flux. Each step is a Strang splitting: half a step of exact
//! killing `f ← e^{-ΛΔt/2} f`, one TR-BDF2 step of drift and diffusion, and
//! another half step of killing. Drift and diffusion conserve `Σf` exactly,
//! so all mass loss comes from the killing factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::{csv_document, Provenance};
use crate::rate::{validate_rate, RateSpec};
use crate::sde::OUParams;
use crate::stats::SurvivalCurve;

/// Most negative density tolerated before the run is abandoned.
pub const NEGATIVITY_TOL: f64 = -1e-12;

/// Mass within two cells of a wall above which a run is flagged.
pub const BOUNDARY_MASS_TOL: f64 = 1e-8;

/// Spatial domain, resolution, time stepping and output schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FPGrid {
    pub x_min: f64,
    pub x_max: f64,
    /// Number of cells.
    pub nodes: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Width of the Gaussian replacing the initial delta; `None` means five
    /// cell widths.
    #[serde(default)]
    pub sigma0: Option<f64>,
    /// Record `N` and `n` every this many steps.
    #[serde(default = "one")]
    pub record_every: usize,
    /// Times at which the density is stored, rounded to the nearest step.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

fn one() -> usize {
    1
}

/// Default cell width.
pub const DEFAULT_SPACING: f64 = 0.05;

/// Default time step.
pub const DEFAULT_DT: f64 = 5e-3;

impl FPGrid {
    /// Default grid: `±40/√max(ε, 10⁻²)` clipped to `±400`, cell width
    /// [`DEFAULT_SPACING`] and step [`DEFAULT_DT`].
    pub fn default_for(params: &OUParams, t_end: f64) -> Self {
        let half = (40.0 / params.eps.max(1e-2).sqrt()).min(400.0);
        Self::symmetric(half, DEFAULT_SPACING, DEFAULT_DT, t_end)
    }

    /// Grid on `[-half, half]` with cell width close to `h`.
    pub fn symmetric(half: f64, h: f64, dt: f64, t_end: f64) -> Self {
        let nodes = 2 * ((half / h).round() as usize).max(1);
        Self {
            x_min: -half,
            x_max: half,
            nodes,
            dt,
            t_end,
            sigma0: None,
            record_every: 1,
            snapshot_times: Vec::new(),
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.nodes as f64
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0.unwrap_or(5.0 * self.spacing())
    }

    /// Cell centres.
    pub fn centers(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.nodes).map(|i| self.x_min + (i as f64 + 0.5) * h).collect()
    }

    /// Number of time steps, the smallest `k` with `k·Δt >= t_end`.
    pub fn steps(&self) -> usize {
        let k = (self.t_end / self.dt - 1e-9).ceil();
        k.max(1.0) as usize
    }

    /// Checks the grid against the model it will be used for.
    pub fn validate(&self, params: &OUParams) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.x_min < 0.0 && 0.0 < self.x_max) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return cfg(format!("domain [{}, {}] must be finite and contain 0", self.x_min, self.x_max));
        }
        if self.nodes < 10 {
            return cfg(format!("need at least 10 cells, got {}", self.nodes));
        }
        if !(self.dt > 0.0) || !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return cfg(format!("need 0 < dt <= t_end, got dt={} t_end={}", self.dt, self.t_end));
        }
        if self.record_every == 0 {
            return cfg("record_every must be at least 1".into());
        }
        let h = self.spacing();
        let s0 = self.sigma0();
        if !(s0 >= 3.0 * h) {
            return cfg(format!("sigma0 = {s0} must be at least 3 cell widths ({})", 3.0 * h));
        }
        if params.x0 - 3.0 * s0 < self.x_min || params.x0 + 3.0 * s0 > self.x_max {
            return cfg(format!("initial state {} is within 3 sigma0 of a wall", params.x0));
        }
        if params.eps < 1e-3 && self.t_end * params.eps * params.eps > 10.0 {
            return cfg(format!(
                "t_end·ε² = {:.3e} exceeds 10 at ε = {:e}; this horizon is out of the solver's range",
                self.t_end * params.eps * params.eps,
                params.eps
            ));
        }
        // TR-BDF2 is unconditionally stable; these bounds keep the killing
        // and drift resolved in time.
        if self.dt * params.eps > 0.5 {
            return cfg(format!("dt·ε = {} exceeds 0.5", self.dt * params.eps));
        }
        Ok(())
    }
}

/// Density on the cell centres at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySnapshot {
    pub t: f64,
    pub density: Vec<f64>,
}

/// Output of [`solve_fokker_planck`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FPSolution {
    pub times: Vec<f64>,
    /// `N(t)`, the surviving mass.
    pub survival: Vec<f64>,
    /// `n(t) = ∫Λf dx`, the waiting-time density.
    pub density: Vec<f64>,
    pub centers: Vec<f64>,
    pub snapshots: Vec<DensitySnapshot>,
    /// Largest `|N_{k+1} - N_k + Δt(n_k + n_{k+1})/2|` over all steps.
    pub max_mass_residual: f64,
    /// Largest mass within two cells of either wall.
    pub max_boundary_mass: f64,
    pub boundary_adequate: bool,
    pub min_density: f64,
}

impl FPSolution {
    /// Mean of `n` over `[a, b]`, i.e. `(N(a) - N(b)) / (b - a)` with `N`
    /// interpolated linearly between records.
    pub fn bin_average(&self, a: f64, b: f64) -> Result<f64> {
        let c = survival_from_pde(self)?;
        Ok((c.at(a) - c.at(b)) / (b - a))
    }

    pub fn to_csv(&self, provenance: &Provenance) -> String {
        csv_document(
            provenance,
            &["t", "N", "n"],
            self.times.iter().zip(&self.survival).zip(&self.density).map(|((t, s), n)| format!("{t},{s},{n}")),
        )
    }

    pub fn snapshots_to_csv(&self, provenance: &Provenance) -> String {
        let rows = self
            .snapshots
            .iter()
            .flat_map(|s| self.centers.iter().zip(&s.density).map(move |(x, f)| format!("{},{x},{f}", s.t)));
        csv_document(provenance, &["t", "x", "f"], rows)
    }
}

/// `z / (e^z - 1)`.
fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-10 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

/// Tridiagonal operator `(Af)_i = lower_i f_{i-1} + diag_i f_i + upper_i f_{i+1}`.
struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    /// Drift–diffusion operator with zero-flux walls. Every column sums to
    /// zero, so `Σf` is conserved.
    fn drift_diffusion(grid: &FPGrid, eps: f64) -> Self {
        let n = grid.nodes;
        let h = grid.spacing();
        // face i sits between cells i and i+1; flux/h = a_i f_i - b_i f_{i+1}
        let (mut a, mut b) = (vec![0.0; n - 1], vec![0.0; n - 1]);
        for i in 0..n - 1 {
            let x_face = grid.x_min + (i + 1) as f64 * h;
            let peclet = -eps * x_face * h;
            a[i] = bernoulli(-peclet) / (h * h);
            b[i] = bernoulli(peclet) / (h * h);
        }
        let mut t = Self { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] };
        for i in 0..n {
            if i > 0 {
                t.lower[i] = a[i - 1];
                t.diag[i] -= b[i - 1];
            }
            if i + 1 < n {
                t.upper[i] = b[i];
                t.diag[i] -= a[i];
            }
        }
        t
    }

    /// `out = f + c·Af`.
    fn apply_shifted(&self, c: f64, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        for i in 0..n {
            let mut v = f[i] + c * self.diag[i] * f[i];
            if i > 0 {
                v += c * self.lower[i] * f[i - 1];
            }
            if i + 1 < n {
                v += c * self.upper[i] * f[i + 1];
            }
            out[i] = v;
        }
    }
}

/// LU factors of `I - cA` for repeated Thomas solves.
struct Factored {
    lower: Vec<f64>,
    upper_scaled: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Factored {
    fn new(op: &Tridiagonal, c: f64) -> Self {
        let n = op.diag.len();
        let mut upper_scaled = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let lower: Vec<f64> = op.lower.iter().map(|l| -c * l).collect();
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = 1.0 - c * op.diag[i] - if i > 0 { lower[i] * prev } else { 0.0 };
            inv_pivot[i] = 1.0 / pivot;
            prev = -c * op.upper[i] * inv_pivot[i];
            upper_scaled[i] = prev;
        }
        Self { lower, upper_scaled, inv_pivot }
    }

    /// Solves in place.
    fn solve(&self, r: &mut [f64]) {
        let n = r.len();
        r[0] *= self.inv_pivot[0];
        for i in 1..n {
            r[i] = (r[i] - self.lower[i] * r[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            r[i] -= self.upper_scaled[i] * r[i + 1];
        }
    }
}

/// Evolves the killed density from a Gaussian of width `σ₀` at `x₀` and
/// records `N(t)`, `n(t)` and the requested snapshots.
pub fn solve_fokker_planck(params: &OUParams, rate: &RateSpec, grid: &FPGrid) -> Result<FPSolution> {
    params.validate()?;
    validate_rate(rate)?;
    grid.validate(params)?;
    let n = grid.nodes;
    let h = grid.spacing();
    let dt = grid.dt;
    let x = grid.centers();
    let lambda: Vec<f64> = x.iter().map(|&xi| rate.eval(xi)).collect();
    if let Some(bad) = lambda.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::Config(format!("rate takes the value {bad} on the grid")));
    }
    let kill: Vec<f64> = lambda.iter().map(|l| (-0.5 * l * dt).exp()).collect();

    let s0 = grid.sigma0();
    let mut f: Vec<f64> = x.iter().map(|xi| (-0.5 * ((xi - params.x0) / s0).powi(2)).exp()).collect();
    let mass: f64 = f.iter().sum::<f64>() * h;
    f.iter_mut().for_each(|v| *v /= mass);

    let op = Tridiagonal::drift_diffusion(grid, params.eps);
    let gamma = 2.0 - std::f64::consts::SQRT_2;
    let tr = Factored::new(&op, 0.5 * gamma * dt);
    let bdf = Factored::new(&op, (1.0 - gamma) / (2.0 - gamma) * dt);
    let w_stage = 1.0 / (gamma * (2.0 - gamma));
    let w_prev = (1.0 - gamma).powi(2) / (gamma * (2.0 - gamma));

    let mass_of = |f: &[f64]| f.iter().sum::<f64>() * h;
    let flux_of = |f: &[f64]| f.iter().zip(&lambda).map(|(a, b)| a * b).sum::<f64>() * h;
    let wall_mass = |f: &[f64]| h * (f[0] + f[1]).max(f[n - 1] + f[n - 2]);

    let steps = grid.steps();
    let snapshot_steps: Vec<(usize, f64)> = grid
        .snapshot_times
        .iter()
        .map(|&t| (((t / dt).round().max(0.0) as usize).min(steps), t))
        .collect();
    let mut sol = FPSolution {
        times: vec![0.0],
        survival: vec![mass_of(&f)],
        density: vec![flux_of(&f)],
        centers: x.clone(),
        snapshots: Vec::new(),
        max_mass_residual: 0.0,
        max_boundary_mass: wall_mass(&f),
        boundary_adequate: true,
        min_density: f.iter().copied().fold(f64::INFINITY, f64::min),
    };
    let take_snapshots = |k: usize, f: &[f64], sol: &mut FPSolution| {
        for &(s, _) in snapshot_steps.iter().filter(|(s, _)| *s == k) {
            sol.snapshots.push(DensitySnapshot { t: s as f64 * dt, density: f.to_vec() });
        }
    };
    take_snapshots(0, &f, &mut sol);

    let (mut prev_mass, mut prev_flux) = (sol.survival[0], sol.density[0]);
    let mut stage = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for k in 1..=steps {
        f.iter_mut().zip(&kill).for_each(|(v, q)| *v *= q);
        // trapezoidal stage to t + γΔt
        op.apply_shifted(0.5 * gamma * dt, &f, &mut stage);
        tr.solve(&mut stage);
        // BDF2 stage to t + Δt
        for i in 0..n {
            rhs[i] = w_stage * stage[i] - w_prev * f[i];
        }
        bdf.solve(&mut rhs);
        for i in 0..n {
            f[i] = rhs[i] * kill[i];
        }

        let min = f.iter().copied().fold(f64::INFINITY, f64::min);
        sol.min_density = sol.min_density.min(min);
        if min < NEGATIVITY_TOL {
            return Err(Error::Scheme(format!("density reached {min:e} at t = {}", k as f64 * dt)));
        }
        let (m, q) = (mass_of(&f), flux_of(&f));
        sol.max_mass_residual = sol.max_mass_residual.max((m - prev_mass + 0.5 * dt * (q + prev_flux)).abs());
        (prev_mass, prev_flux) = (m, q);
        sol.max_boundary_mass = sol.max_boundary_mass.max(wall_mass(&f));
        if k % grid.record_every == 0 || k == steps {
            sol.times.push(k as f64 * dt);
            sol.survival.push(m);
            sol.density.push(q);
        }
        take_snapshots(k, &f, &mut sol);
    }
    sol.boundary_adequate = sol.max_boundary_mass <= BOUNDARY_MASS_TOL;
    Ok(sol)
}

/// `N(t)` read as the survival function `P(T > t)` on the time grid.
pub fn survival_from_pde(solution: &FPSolution) -> Result<SurvivalCurve> {
    let s = solution.survival.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    SurvivalCurve::from_table(solution.times.clone(), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_limits() {
        assert_eq!(bernoulli(0.0), 1.0);
        assert!((bernoulli(1e-3) - 1e-3 / (1e-3f64).exp_m1()).abs() < 1e-15);
        // B(-z) - B(z) = z
        for z in [0.3, 2.0, 40.0] {
            assert!((bernoulli(-z) - bernoulli(z) - z).abs() < 1e-12 * z.max(1.0));
        }
    }

    #[test]
    fn operator_conserves_mass() {
        let g = FPGrid::symmetric(5.0, 0.25, 0.1, 1.0);
        let op = Tridiagonal::drift_diffusion(&g, 0.3);
        for j in 0..g.nodes {
            let mut col = op.diag[j];
            if j > 0 {
                col += op.upper[j - 1];
            }
            if j + 1 < g.nodes {
                col += op.lower[j + 1];
            }
            assert!(col.abs() < 1e-12, "column {j}: {col}");
        }
    }

    #[test]
    fn thomas_solve_inverts() {
        let g = FPGrid::symmetric(5.0, 0.5, 0.1, 1.0);
        let op = Tridiagonal::drift_diffusion(&g, 0.2);
        let c = 0.07;
        let fac = Factored::new(&op, c);
        let y: Vec<f64> = (0..g.nodes).map(|i| (i as f64 * 0.3).sin() + 2.0).collect();
        // (I - cA) y
        let mut r = vec![0.0; g.nodes];
        op.apply_shifted(-c, &y, &mut r);
        fac.solve(&mut r);
        for (a, b) in r.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_checks() {
        let p = OUParams::new(0.01, 0.0).unwrap();
        let g = FPGrid::default_for(&p, 10.0);
        assert_eq!((g.x_min, g.x_max), (-400.0, 400.0));
        assert!(g.validate(&p).is_ok());
        assert_eq!(FPGrid::default_for(&OUParams::new(4.0, 0.0).unwrap(), 1.0).x_max, 20.0);
        assert!(FPGrid { sigma0: Some(0.01), ..g.clone() }.validate(&p).is_err());
        assert!(FPGrid { x_min: 1.0, ..g.clone() }.validate(&p).is_err());
        let tiny = OUParams::new(1e-4, 0.0).unwrap();
        assert!(matches!(
            FPGrid::symmetric(50.0, 0.1, 1.0, 2e9).validate(&tiny),
            Err(Error::Config(_))
        ));
        assert_eq!(FPGrid::symmetric(5.0, 0.5, 0.1, 1.0).steps(), 10);
    }
}
