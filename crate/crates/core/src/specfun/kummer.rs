//! Kummer's confluent hypergeometric function `M(a, b, z)`.

use super::gamma::ln_gamma_abs;
use super::{check_args, AccuracyPolicy, CompensatedSum};
use crate::error::{Error, Result};

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Series value of `M(a, b, z)` together with the rounding amplification
/// factor of the summation.
pub(crate) struct Evaluated {
    pub value: f64,
    pub condition: f64,
}

/// `M(a, b, z) = Σ (a)_k z^k / ((b)_k k!)`.
pub fn kummer_m(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<f64> {
    let e = kummer_m_eval(a, b, z, policy)?;
    let err = f64::EPSILON * (4.0 + e.condition);
    if err > policy.tol {
        return Err(Error::Accuracy {
            what: format!("M({a}, {b}, {z}) lost precision to cancellation (condition {:.1e})", e.condition),
            partial: e.value,
        });
    }
    Ok(e.value)
}

pub(crate) fn kummer_m_eval(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<Evaluated> {
    policy.validate()?;
    check_args("kummer_m", &[a, b, z])?;
    if is_nonpositive_integer(b) {
        return Err(Error::Pole(format!("M(a, b, z) has a pole at b = {b}")));
    }
    if z == 0.0 || a == 0.0 {
        return Ok(Evaluated { value: 1.0, condition: 1.0 });
    }
    if z < 0.0 {
        // Kummer's transformation keeps the series free of alternation.
        let inner = kummer_m_eval(b - a, b, -z, policy)?;
        return Ok(Evaluated { value: z.exp() * inner.value, condition: inner.condition });
    }
    if z >= policy.kummer_switch && !is_nonpositive_integer(a) {
        if let Some(v) = asymptotic(a, b, z, policy)? {
            return Ok(v);
        }
    }
    series(a, b, z, policy)
}

fn series(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<Evaluated> {
    let mut acc = CompensatedSum::default();
    let mut term = 1.0;
    acc.add(term);
    for k in 0..policy.max_terms {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        if term == 0.0 {
            return Ok(Evaluated { value: acc.value(), condition: acc.condition() });
        }
        acc.add(term);
        if !term.is_finite() || !acc.value().is_finite() {
            return Err(Error::Accuracy {
                what: format!("M({a}, {b}, {z}) overflows"),
                partial: acc.value(),
            });
        }
        // past the peak the remainder is bounded by a geometric tail
        let ratio = ((a + kf + 1.0) / (b + kf + 1.0) * z / (kf + 2.0)).abs();
        if ratio < 1.0 && (a + kf + 1.0) * (b + kf + 1.0) > 0.0 {
            let tail = term.abs() * ratio / (1.0 - ratio);
            if tail <= 0.25 * f64::EPSILON * acc.value().abs() {
                return Ok(Evaluated { value: acc.value(), condition: acc.condition() });
            }
        }
    }
    Err(Error::Accuracy {
        what: format!("M({a}, {b}, {z}) series did not converge in {} terms", policy.max_terms),
        partial: acc.value(),
    })
}

/// Large-`z` expansion `Γ(b)/Γ(a) e^z z^{a-b} Σ (b-a)_s (1-a)_s / (s! z^s)`.
/// Returns `None` when the divergent series cannot reach the tolerance.
fn asymptotic(a: f64, b: f64, z: f64, policy: &AccuracyPolicy) -> Result<Option<Evaluated>> {
    let mut acc = CompensatedSum::default();
    let mut term = 1.0f64;
    acc.add(term);
    let mut converged = false;
    for s in 0..policy.max_terms {
        let sf = s as f64;
        let next = term * (b - a + sf) * (1.0 - a + sf) / ((sf + 1.0) * z);
        if next == 0.0 {
            converged = true;
            break;
        }
        if next.abs() >= term.abs() {
            converged = term.abs() <= 0.1 * policy.tol * acc.value().abs();
            break;
        }
        term = next;
        acc.add(term);
        if term.abs() <= 0.25 * f64::EPSILON * acc.value().abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Ok(None);
    }
    let (lgb, sb) = ln_gamma_abs(b)?;
    let (lga, sa) = ln_gamma_abs(a)?;
    let s = acc.value();
    let log_mag = lgb - lga + z + (a - b) * z.ln() + s.abs().ln();
    if log_mag > 709.0 {
        return Err(Error::Accuracy {
            what: format!("M({a}, {b}, {z}) overflows double precision"),
            partial: f64::INFINITY,
        });
    }
    let value = sb * sa * s.signum() * log_mag.exp();
    // log_mag carries an absolute rounding error of a few ulps of its size
    let cond = acc.condition() + log_mag.abs();
    Ok(Some(Evaluated { value, condition: cond }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_values() {
        let p = AccuracyPolicy::default();
        // mpmath hyp1f1 at 50 digits
        let cases = [
            (0.5, 1.5, 2.0, 2.3644538928052092846),
            (1.3, 2.7, 5.0, 23.78808328332267341),
            (-2.5, 0.5, 3.0, 3.393009798012870703),
            (0.25, 0.5, -4.0, 0.37402255191132824763),
            (2.0, 1.5, 80.0, 4.4193091132859828026e35),
            (-0.75, 1.5, 120.0, -5.1875718700234932372e46),
            (50.25, 0.5, 2.0, 680114844.94509391145),
        ];
        for (a, b, z, want) in cases {
            let got = kummer_m(a, b, z, &p).unwrap();
            assert!(rel(got, want) < 1e-12, "M({a},{b},{z}) = {got}, want {want}");
        }
    }

    #[test]
    fn limits_and_identities() {
        let p = AccuracyPolicy::default();
        assert_eq!(kummer_m(0.3, 1.7, 0.0, &p).unwrap(), 1.0);
        for z in [-3.0, 0.5, 7.0, 45.0] {
            let got = kummer_m(1.25, 1.25, z, &p).unwrap();
            assert!(rel(got, f64::exp(z)) < 1e-13, "z={z}");
        }
        // terminating polynomial: M(-2, 1, z) = 1 - 2z + z²/2
        let z: f64 = 3.0;
        let got = kummer_m(-2.0, 1.0, z, &p).unwrap();
        assert!((got - (1.0 - 2.0 * z + z * z / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn pole_in_b() {
        let p = AccuracyPolicy::default();
        assert!(matches!(kummer_m(0.5, -2.0, 1.0, &p), Err(Error::Pole(_))));
        assert!(matches!(kummer_m(0.5, 0.0, 1.0, &p), Err(Error::Pole(_))));
    }

    #[test]
    fn derivative_at_origin() {
        let p = AccuracyPolicy::default();
        let h = 1e-6;
        for (a, b) in [(0.5, 1.5), (-1.3, 2.2), (3.0, 0.7)] {
            let d = (kummer_m(a, b, h, &p).unwrap() - kummer_m(a, b, -h, &p).unwrap()) / (2.0 * h);
            assert!((d - a / b).abs() < 1e-8, "a={a} b={b}");
        }
    }

    #[test]
    fn switch_is_seamless() {
        let p = AccuracyPolicy::default();
        let series_only = AccuracyPolicy { kummer_switch: 1e9, ..p };
        for (a, b) in [(0.25, 0.5), (0.75, 1.5), (2.3, 0.5), (-0.25, 1.5)] {
            for z in [40.0, 55.0, 90.0] {
                let x = kummer_m(a, b, z, &p).unwrap();
                let y = kummer_m(a, b, z, &series_only).unwrap();
                assert!(rel(x, y) < 1e-12, "a={a} b={b} z={z}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn non_convergence_reports_partial() {
        let p = AccuracyPolicy { max_terms: 100, kummer_switch: 1e9, ..Default::default() };
        match kummer_m(0.5, 1.5, 300.0, &p) {
            Err(Error::Accuracy { partial, .. }) => assert!(partial > 0.0),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }
}
