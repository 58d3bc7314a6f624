//! Identity checks over a fixed validation grid, shared by the CLI and the
//! acceptance suite.

use serde::{Deserialize, Serialize};

use super::{bessel_i, kummer_m, pcf_u, pcf_u_deriv, pcf_v, rgamma, AccuracyPolicy};
use crate::error::Result;

/// Outcome of one identity over its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub description: String,
    /// Largest scaled residual seen on the grid.
    pub worst: f64,
    pub tolerance: f64,
    pub evaluations: usize,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &str, description: &str, worst: f64, tolerance: f64, evaluations: usize) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            worst,
            tolerance,
            evaluations,
            passed: worst <= tolerance,
        }
    }
}

/// Orders `a ∈ [-2, 5]` in steps of 1/2.
pub fn grid_orders() -> Vec<f64> {
    (0..=14).map(|i| -2.0 + 0.5 * i as f64).collect()
}

/// Arguments `x ∈ [0, 5]` in steps of 1/4.
pub fn grid_arguments() -> Vec<f64> {
    (0..=20).map(|j| 0.25 * j as f64).collect()
}

fn second_derivative(f: &dyn Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    Ok((-f(x + 2.0 * h)? + 16.0 * f(x + h)? - 30.0 * f(x)? + 16.0 * f(x - h)? - f(x - 2.0 * h)?)
        / (12.0 * h * h))
}

/// Runs every identity check. Evaluation failures propagate as errors.
pub fn identity_checks(policy: &AccuracyPolicy) -> Result<Vec<IdentityCheck>> {
    let p = policy;
    let orders = grid_orders();
    let args = grid_arguments();
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    let mut n = 0;
    for &(a, b) in &[(0.5, 1.5), (-3.2, 0.4), (7.0, 2.0), (1.0, -0.5), (2.5, 2.5)] {
        worst = worst.max((kummer_m(a, b, 0.0, p)? - 1.0).abs());
        n += 1;
    }
    out.push(IdentityCheck::new("kummer_origin", "M(a, b, 0) = 1", worst, 1e-15, n));

    let (mut worst, mut n) = (0.0f64, 0);
    for z in [-10.0, -1.0, 0.3, 12.0, 60.0] {
        worst = worst.max((kummer_m(2.5, 2.5, z, p)? / z.exp() - 1.0).abs());
        n += 1;
    }
    out.push(IdentityCheck::new("kummer_exponential", "M(a, a, z) = e^z", worst, 1e-12, n));

    let (mut worst, mut n) = (0.0f64, 0);
    let h = 1e-7;
    for &(a, b) in &[(0.5, 1.5), (2.0, 0.25), (-1.7, 3.0)] {
        let d = (kummer_m(a, b, h, p)? - kummer_m(a, b, -h, p)?) / (2.0 * h);
        worst = worst.max((d - a / b).abs());
        n += 1;
    }
    out.push(IdentityCheck::new("kummer_slope", "dM/dz(a, b, 0) = a/b", worst, 1e-8, n));

    let (mut worst, mut n) = (0.0f64, 0);
    let h = 1e-2;
    for &a in &orders {
        let u = move |t: f64| pcf_u(a, t, p);
        let v = move |t: f64| pcf_v(a, t, p);
        for &x in &args {
            for f in [&u as &dyn Fn(f64) -> Result<f64>, &v] {
                let d2 = second_derivative(f, x, h)?;
                let res = (d2 - (x * x / 4.0 + a) * f(x)?).abs();
                worst = worst.max(res / (1.0 + d2.abs()));
                n += 1;
            }
        }
    }
    out.push(IdentityCheck::new(
        "weber_residual",
        "U and V solve y'' = (x²/4 + a) y, residual over 1 + |y''|",
        worst,
        1e-6,
        n,
    ));

    let sqrt_pi = std::f64::consts::PI.sqrt();
    let (mut worst_v, mut worst_d, mut n) = (0.0f64, 0.0f64, 0);
    for &a in &orders {
        let u0 = sqrt_pi / 2f64.powf(a / 2.0 + 0.25) * rgamma(0.75 + a / 2.0);
        let d0 = -sqrt_pi / 2f64.powf(a / 2.0 - 0.25) * rgamma(a / 2.0 + 0.25);
        worst_v = worst_v.max((pcf_u(a, 1e-10, p)? - u0).abs() / u0.abs().max(1.0));
        worst_d = worst_d.max((pcf_u_deriv(a, 1e-10, p)? - d0).abs() / d0.abs().max(1.0));
        n += 1;
    }
    out.push(IdentityCheck::new(
        "u_at_origin",
        "U(a, 0+) = √π / (2^{a/2+1/4} Γ(3/4 + a/2))",
        worst_v,
        1e-9,
        n,
    ));
    out.push(IdentityCheck::new(
        "u_slope_at_origin",
        "U'(a, 0+) = -√π / (2^{a/2-1/4} Γ(a/2 + 1/4))",
        worst_d,
        1e-9,
        n,
    ));

    let (mut worst, mut n) = (0.0f64, 0);
    let h = 1e-5;
    for &a in &orders {
        for &x in args.iter().filter(|&&x| x >= 2.0 * h) {
            let fd = (pcf_u(a, x + h, p)? - pcf_u(a, x - h, p)?) / (2.0 * h);
            let d = pcf_u_deriv(a, x, p)?;
            let scale = d.abs().max(pcf_u(a, x, p)?.abs());
            worst = worst.max((fd - d).abs() / scale);
            n += 1;
        }
    }
    out.push(IdentityCheck::new(
        "u_derivative",
        "U'(a, x) = x U(a, x)/2 - U(a-1, x) against a central difference",
        worst,
        1e-6,
        n,
    ));

    let (mut worst, mut n) = (0.0f64, 0);
    let x = 30.0f64;
    for a in [-1.5, 0.0, 1.0, 2.5] {
        let lead_u = (-x * x / 4.0).exp() * x.powf(-a - 0.5);
        let lead_v = (2.0 / std::f64::consts::PI).sqrt() * (x * x / 4.0).exp() * x.powf(a - 0.5);
        worst = worst.max((pcf_u(a, x, p)? / lead_u - 1.0).abs());
        worst = worst.max((pcf_v(a, x, p)? / lead_v - 1.0).abs());
        n += 2;
    }
    out.push(IdentityCheck::new(
        "large_argument_ratios",
        "U and V over their leading large-x terms at x = 30",
        worst,
        1e-2,
        n,
    ));

    let (mut worst, mut n) = (0.0f64, 0);
    let h = 1e-6;
    for x in [0.5, 1.0, 3.0, 10.0, 25.0] {
        let d = (bessel_i(0, x + h, p)? - bessel_i(0, x - h, p)?) / (2.0 * h);
        let i1 = bessel_i(1, x, p)?;
        worst = worst.max((d - i1).abs() / i1);
        n += 1;
    }
    out.push(IdentityCheck::new("bessel_derivative", "I₀' = I₁", worst, 1e-8, n));
    Ok(out)
}

/// `(function, a, x, value)` rows of `U`, `U'` and `V` on the validation
/// grid.
pub fn validation_table(policy: &AccuracyPolicy) -> Result<Vec<(&'static str, f64, f64, f64)>> {
    let mut rows = Vec::new();
    for &a in &grid_orders() {
        for &x in &grid_arguments() {
            rows.push(("U", a, x, pcf_u(a, x, policy)?));
            rows.push(("dU", a, x, pcf_u_deriv(a, x, policy)?));
            rows.push(("V", a, x, pcf_v(a, x, policy)?));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_identities_hold() {
        for c in identity_checks(&AccuracyPolicy::default()).unwrap() {
            assert!(c.passed, "{}: {:e} > {:e}", c.name, c.worst, c.tolerance);
            assert!(c.evaluations > 0);
        }
    }

    #[test]
    fn table_covers_grid() {
        let t = validation_table(&AccuracyPolicy::default()).unwrap();
        assert_eq!(t.len(), 3 * 15 * 21);
        assert!(t.iter().all(|r| r.3.is_finite()));
    }
}
