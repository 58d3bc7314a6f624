//! Modified Bessel functions `I₀` and `I₁` of nonnegative real argument.

use std::f64::consts::PI;

use super::{check_args, AccuracyPolicy, CompensatedSum};
use crate::error::{Error, Result};

fn check(order: u32, x: f64, policy: &AccuracyPolicy) -> Result<()> {
    policy.validate()?;
    check_args("bessel_i", &[x])?;
    if order > 1 {
        return Err(Error::Domain(format!("bessel_i supports orders 0 and 1, got {order}")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("bessel_i needs x >= 0, got {x}")));
    }
    Ok(())
}

/// Ascending series `Σ (x/2)^{2k+ν} / (k! (k+ν)!)`, multiplied by `e^{-x}`.
fn series_scaled(order: u32, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    let q = 0.25 * x * x;
    let nu = order as f64;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut acc = CompensatedSum::default();
    acc.add(term);
    for k in 1..policy.max_terms {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        acc.add(term);
        if term <= 0.25 * f64::EPSILON * acc.value() {
            return Ok(acc.value() * (-x).exp());
        }
    }
    Err(Error::Accuracy {
        what: format!("I{order}({x}) series did not converge"),
        partial: acc.value() * (-x).exp(),
    })
}

/// Coefficients `(-1)^k a_k(ν) / x^k` of the large-`x` expansion, summed
/// until the smallest term; `None` if that term is above tolerance.
fn asymptotic_terms(order: u32, x: f64, policy: &AccuracyPolicy) -> Option<Vec<f64>> {
    let mu = 4.0 * (order * order) as f64;
    let mut terms = vec![1.0];
    let mut term = 1.0f64;
    for k in 1..policy.max_terms {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * kf * x);
        if next == 0.0 {
            return Some(terms);
        }
        if next.abs() >= term.abs() {
            return (term.abs() <= 0.1 * policy.tol).then_some(terms);
        }
        term = next;
        terms.push(term);
        if term.abs() <= 0.25 * f64::EPSILON {
            return Some(terms);
        }
    }
    None
}

fn asymptotic_scaled(order: u32, x: f64, policy: &AccuracyPolicy) -> Option<f64> {
    let terms = asymptotic_terms(order, x, policy)?;
    let mut acc = CompensatedSum::default();
    for t in terms.iter().rev() {
        acc.add(*t);
    }
    Some(acc.value() / (2.0 * PI * x).sqrt())
}

/// `e^{-x} I_ν(x)` for `ν ∈ {0, 1}` and `x >= 0`.
pub fn bessel_i_scaled(order: u32, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    check(order, x, policy)?;
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    if x >= policy.bessel_switch {
        if let Some(v) = asymptotic_scaled(order, x, policy) {
            return Ok(v);
        }
    }
    series_scaled(order, x, policy)
}

/// `I_ν(x)` for `ν ∈ {0, 1}` and `x >= 0`.
pub fn bessel_i(order: u32, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    let s = bessel_i_scaled(order, x, policy)?;
    let v = s * x.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Accuracy { what: format!("I{order}({x}) overflows"), partial: f64::INFINITY })
    }
}

/// `e^{-x} [I₀(x) - I₁(x)]`, free of the cancellation of the naive
/// difference at large `x`.
pub fn i0_minus_i1_scaled(x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    check(0, x, policy)?;
    if x >= policy.bessel_switch {
        if let (Some(t0), Some(t1)) =
            (asymptotic_terms(0, x, policy), asymptotic_terms(1, x, policy))
        {
            let n = t0.len().min(t1.len());
            let mut acc = CompensatedSum::default();
            // leading terms cancel exactly
            for k in (1..n).rev() {
                acc.add(t0[k] - t1[k]);
            }
            return Ok(acc.value() / (2.0 * PI * x).sqrt());
        }
    }
    Ok(series_scaled(0, x, policy)? - series_scaled(1, x, policy)?)
}
