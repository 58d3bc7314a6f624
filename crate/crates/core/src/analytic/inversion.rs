//! Numerical inverse Laplace transforms: Gaver–Stehfest on the positive
//! real axis and fixed Talbot on a deformed Bromwich contour.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{domain, Error, Result};

/// A Laplace-domain function. Real evaluation is mandatory; extended
/// precision and complex evaluation are optional.
pub trait LaplaceTransform {
    fn eval(&self, s: f64) -> Result<f64>;

    /// Evaluation in double-double arithmetic, if available.
    fn eval_dd(&self, _s: DoubleDouble) -> Option<Result<DoubleDouble>> {
        None
    }

    /// Evaluation off the real axis, if an analytic continuation is known.
    fn eval_complex(&self, _s: Complex64) -> Option<Result<Complex64>> {
        None
    }
}

impl<F: Fn(f64) -> f64> LaplaceTransform for F {
    fn eval(&self, s: f64) -> Result<f64> {
        Ok(self(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InversionMethod {
    GaverStehfest,
    Talbot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkingPrecision {
    /// Double precision throughout.
    Double,
    /// Weights, nodes and sums in double-double (about 32 digits); needs
    /// [`LaplaceTransform::eval_dd`] for Gaver–Stehfest.
    DoubleDouble,
}

/// Method, node count and precision for [`inverse_laplace`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionPolicy {
    pub method: InversionMethod,
    /// Gaver–Stehfest order (even, 8..=20) or Talbot node count (16..=128).
    pub nodes: usize,
    pub precision: WorkingPrecision,
    /// Largest relative spread tolerated between Gaver–Stehfest orders
    /// `N - 2`, `N` and `N + 2` before the result is rejected.
    pub sweep_tol: f64,
}

impl Default for InversionPolicy {
    fn default() -> Self {
        Self::gaver_stehfest(12)
    }
}

impl InversionPolicy {
    pub fn gaver_stehfest(order: usize) -> Self {
        Self {
            method: InversionMethod::GaverStehfest,
            nodes: order,
            precision: WorkingPrecision::Double,
            sweep_tol: 5e-2,
        }
    }

    pub fn talbot(nodes: usize) -> Self {
        Self { method: InversionMethod::Talbot, nodes, precision: WorkingPrecision::Double, sweep_tol: 5e-2 }
    }

    pub fn with_precision(mut self, precision: WorkingPrecision) -> Self {
        self.precision = precision;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            InversionMethod::GaverStehfest => {
                if self.nodes % 2 != 0 || !(8..=20).contains(&self.nodes) {
                    return Err(Error::Config(format!(
                        "Gaver-Stehfest order must be even and in [8, 20], got {}",
                        self.nodes
                    )));
                }
            }
            InversionMethod::Talbot => {
                if !(16..=128).contains(&self.nodes) {
                    return Err(Error::Config(format!(
                        "Talbot node count must be in [16, 128], got {}",
                        self.nodes
                    )));
                }
            }
        }
        if !(self.sweep_tol > 0.0) {
            return Err(Error::Config(format!("sweep_tol must be positive, got {}", self.sweep_tol)));
        }
        Ok(())
    }
}

/// Inverse transform value with the settings that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    pub t: f64,
    pub value: f64,
    pub method: InversionMethod,
    pub nodes: usize,
    pub precision: WorkingPrecision,
    /// Relative spread against neighbouring orders (Gaver–Stehfest only).
    pub sweep_spread: Option<f64>,
}

/// Approximates `f(t)` from its transform `F(s)`.
pub fn inverse_laplace<T: LaplaceTransform + ?Sized>(
    transform: &T,
    t: f64,
    policy: &InversionPolicy,
) -> Result<InversionResult> {
    policy.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain(format!("inversion time must be positive, got {t}")));
    }
    let (value, sweep_spread) = match policy.method {
        InversionMethod::GaverStehfest => {
            let eval = |n: usize| gaver_stehfest(transform, t, n, policy.precision);
            let value = eval(policy.nodes)?;
            let mut spread = 0.0f64;
            for n in neighbour_orders(policy.nodes) {
                let other = eval(n)?;
                spread = spread.max((other - value).abs() / value.abs().max(f64::MIN_POSITIVE));
            }
            if !(spread <= policy.sweep_tol) {
                return Err(Error::Accuracy {
                    what: format!(
                        "Gaver-Stehfest orders disagree by {spread:.2e} (relative) at t = {t}"
                    ),
                    partial: value,
                });
            }
            (value, Some(spread))
        }
        InversionMethod::Talbot => (talbot(transform, t, policy.nodes)?, None),
    };
    Ok(InversionResult {
        t,
        value,
        method: policy.method,
        nodes: policy.nodes,
        precision: policy.precision,
        sweep_spread,
    })
}

fn neighbour_orders(n: usize) -> Vec<usize> {
    let mut v = Vec::new();
    if n >= 10 {
        v.push(n - 2);
    }
    if n <= 18 {
        v.push(n + 2);
    }
    if v.len() < 2 {
        v.push(if n >= 12 { n - 4 } else { n + 4 });
    }
    v
}

fn factorial(n: usize) -> DoubleDouble {
    (1..=n).fold(DoubleDouble::from(1.0), |acc, k| acc * DoubleDouble::from(k as f64))
}

/// Stehfest weights `V_k`, `k = 1..=n`, in double-double.
fn stehfest_weights(n: usize) -> Vec<DoubleDouble> {
    let half = n / 2;
    (1..=n)
        .map(|k| {
            let mut sum = DoubleDouble::from(0.0);
            for j in (k + 1) / 2..=k.min(half) {
                let num = DoubleDouble::from((j as f64).powi(half as i32)) * factorial(2 * j);
                let den = factorial(half - j)
                    * factorial(j)
                    * factorial(j - 1)
                    * factorial(k - j)
                    * factorial(2 * j - k);
                sum += num / den;
            }
            if (k + half) % 2 == 1 {
                -sum
            } else {
                sum
            }
        })
        .collect()
}

fn gaver_stehfest<T: LaplaceTransform + ?Sized>(
    transform: &T,
    t: f64,
    n: usize,
    precision: WorkingPrecision,
) -> Result<f64> {
    let weights = stehfest_weights(n);
    match precision {
        WorkingPrecision::Double => {
            let a = std::f64::consts::LN_2 / t;
            let mut acc = 0.0;
            for (k, w) in weights.iter().enumerate() {
                acc += w.to_f64() * transform.eval(a * (k + 1) as f64)?;
            }
            Ok(a * acc)
        }
        WorkingPrecision::DoubleDouble => {
            let a = DoubleDouble::LN_2 / DoubleDouble::from(t);
            let mut acc = DoubleDouble::from(0.0);
            for (k, w) in weights.iter().enumerate() {
                let s = a * DoubleDouble::from((k + 1) as f64);
                let f = transform.eval_dd(s).ok_or_else(|| {
                    Error::Unsupported("transform has no double-double evaluation".into())
                })??;
                acc += *w * f;
            }
            Ok((a * acc).to_f64())
        }
    }
}

/// Fixed Talbot contour `s(θ) = r θ (cot θ + i)`, `r = 2M / (5t)`.
fn talbot<T: LaplaceTransform + ?Sized>(transform: &T, t: f64, m: usize) -> Result<f64> {
    let r = 2.0 * m as f64 / (5.0 * t);
    let eval = |s: Complex64| {
        transform
            .eval_complex(s)
            .ok_or_else(|| Error::Unsupported("transform has no complex evaluation".into()))?
    };
    let f0 = eval(Complex64::new(r, 0.0))?;
    let mut acc = 0.5 * (r * t).exp() * f0.re;
    for k in 1..m {
        let theta = k as f64 * std::f64::consts::PI / m as f64;
        let cot = theta.cos() / theta.sin();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * t).exp() * eval(s)? * Complex64::new(1.0, sigma);
        acc += term.re;
    }
    Ok(r / m as f64 * acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Shifted;
    impl LaplaceTransform for Shifted {
        fn eval(&self, s: f64) -> Result<f64> {
            Ok(1.0 / (s + 1.0))
        }
        fn eval_dd(&self, s: DoubleDouble) -> Option<Result<DoubleDouble>> {
            Some(Ok(DoubleDouble::from(1.0) / (s + DoubleDouble::from(1.0))))
        }
        fn eval_complex(&self, s: Complex64) -> Option<Result<Complex64>> {
            Some(Ok(1.0 / (s + 1.0)))
        }
    }

    #[test]
    fn known_pairs() {
        let p = InversionPolicy::gaver_stehfest(16);
        let e = inverse_laplace(&|s: f64| 1.0 / (s + 1.0), 1.0, &p).unwrap();
        assert!((e.value - (-1f64).exp()).abs() < 1e-6);
        let r = inverse_laplace(&|s: f64| 1.0 / (s * s), 3.0, &p).unwrap();
        assert!((r.value - 3.0).abs() < 1e-6);
        assert_eq!(r.nodes, 16);
        assert!(r.sweep_spread.unwrap() < 1e-4);
    }

    #[test]
    fn talbot_and_double_double() {
        let t = inverse_laplace(&Shifted, 2.0, &InversionPolicy::talbot(32)).unwrap();
        assert!((t.value - (-2f64).exp()).abs() < 1e-9);
        let dd = InversionPolicy::gaver_stehfest(20).with_precision(WorkingPrecision::DoubleDouble);
        let g = inverse_laplace(&Shifted, 2.0, &dd).unwrap();
        assert!((g.value - (-2f64).exp()).abs() < 1e-6, "{}", g.value - (-2f64).exp());
        // closures have neither extension
        assert!(matches!(
            inverse_laplace(&|s: f64| 1.0 / s, 1.0, &InversionPolicy::talbot(32)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn weights_sum_to_zero() {
        // Σ V_k = 0 makes the inverse of a constant vanish for t > 0
        for n in [8, 12, 20] {
            let s: DoubleDouble = stehfest_weights(n).into_iter().fold(DoubleDouble::from(0.0), |a, b| a + b);
            assert!(s.to_f64().abs() < 1e-20, "n={n}: {}", s.to_f64());
        }
    }

    #[test]
    fn policy_bounds() {
        assert!(InversionPolicy::gaver_stehfest(11).validate().is_err());
        assert!(InversionPolicy::gaver_stehfest(22).validate().is_err());
        assert!(InversionPolicy::gaver_stehfest(6).validate().is_err());
        assert!(InversionPolicy::talbot(8).validate().is_err());
        assert!(InversionPolicy::talbot(200).validate().is_err());
        assert!(InversionPolicy::talbot(64).validate().is_ok());
    }

    #[test]
    fn sweep_disagreement_is_reported() {
        // a discontinuous original defeats Gaver-Stehfest near the jump
        let step = |s: f64| (-s).exp() / s;
        let p = InversionPolicy { sweep_tol: 1e-6, ..InversionPolicy::default() };
        match inverse_laplace(&step, 1.05, &p) {
            Err(Error::Accuracy { partial, .. }) => assert!(partial.is_finite()),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }
}
