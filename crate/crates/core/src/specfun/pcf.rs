//! Parabolic cylinder functions `U(a, x)` and `V(a, x)`, the standard
//! solutions of `y'' = (x²/4 + a) y`.

use std::f64::consts::PI;

use super::gamma::{cos_pi, log_gamma, rgamma, sin_pi};
use super::kummer::kummer_m_eval;
use super::{check_args, AccuracyPolicy, CompensatedSum};
use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516_027_3;

/// `U(a, 0) = √π / (2^{a/2+1/4} Γ(3/4 + a/2))`.
fn u_at_zero(a: f64) -> f64 {
    SQRT_PI * (-(a / 2.0 + 0.25) * std::f64::consts::LN_2).exp() * rgamma(0.75 + a / 2.0)
}

/// `U'(a, 0) = -√π / (2^{a/2-1/4} Γ(1/4 + a/2))`.
fn u_deriv_at_zero(a: f64) -> f64 {
    -SQRT_PI * (-(a / 2.0 - 0.25) * std::f64::consts::LN_2).exp() * rgamma(0.25 + a / 2.0)
}

/// Even and odd solutions `e^{-x²/4} M(a/2+1/4, 1/2, x²/2)` and
/// `x e^{-x²/4} M(a/2+3/4, 3/2, x²/2)` with their rounding amplification.
fn even_odd(a: f64, x: f64, policy: &AccuracyPolicy) -> Result<[(f64, f64); 2]> {
    let z = 0.5 * x * x;
    let g = (-0.25 * x * x).exp();
    let m1 = kummer_m_eval(a / 2.0 + 0.25, 0.5, z, policy)?;
    let m2 = kummer_m_eval(a / 2.0 + 0.75, 1.5, z, policy)?;
    if !(m1.value * g).is_finite() || !(m2.value * g).is_finite() {
        return Err(Error::Accuracy {
            what: format!("parabolic cylinder series overflow at x = {x}"),
            partial: f64::NAN,
        });
    }
    Ok([(g * m1.value, m1.condition), (x * g * m2.value, m2.condition)])
}

/// Combines `c1·y1 + c2·y2` and returns the value with an estimate of its
/// relative rounding error.
fn combine(c: [f64; 2], y: [(f64, f64); 2]) -> (f64, f64) {
    let t1 = c[0] * y[0].0;
    let t2 = c[1] * y[1].0;
    let mut acc = CompensatedSum::default();
    acc.add(t1);
    acc.add(t2);
    let v = acc.value();
    let err = f64::EPSILON * (t1.abs() * (4.0 + y[0].1) + t2.abs() * (4.0 + y[1].1));
    (v, if v == 0.0 { f64::INFINITY } else { err / v.abs() })
}

fn u_kummer(a: f64, x: f64, policy: &AccuracyPolicy) -> Result<(f64, f64)> {
    let y = even_odd(a, x, policy)?;
    Ok(combine([u_at_zero(a), u_deriv_at_zero(a)], y))
}

/// Large-`x` expansion `e^{-x²/4} x^{-a-1/2} Σ (-1)^s (a+1/2)_{2s} / (s! (2x²)^s)`.
fn u_asymptotic(a: f64, x: f64, policy: &AccuracyPolicy) -> Option<f64> {
    let mut acc = CompensatedSum::default();
    let mut term = 1.0f64;
    acc.add(term);
    let w = 2.0 * x * x;
    let c = a + 0.5;
    for s in 0..policy.max_terms {
        let sf = s as f64;
        let next = -term * (c + 2.0 * sf) * (c + 2.0 * sf + 1.0) / ((sf + 1.0) * w);
        if next == 0.0 {
            break;
        }
        if next.abs() >= term.abs() {
            if term.abs() > 0.1 * policy.tol * acc.value().abs() {
                return None;
            }
            break;
        }
        term = next;
        acc.add(term);
        if term.abs() <= 0.25 * f64::EPSILON * acc.value().abs() {
            break;
        }
    }
    if acc.condition() * f64::EPSILON > policy.tol {
        return None;
    }
    Some((-0.25 * x * x - c * x.ln()).exp() * acc.value())
}

/// `ln U(a, x)` for `a > -1/2` from
/// `U(a, x) = e^{-x²/4} / Γ(a+1/2) ∫_0^∞ t^{a-1/2} e^{-t²/2 - xt} dt`.
///
/// With `t = e^v` the integrand is smooth and decays on both sides of its
/// peak, so the trapezoid rule converges geometrically; the step is halved
/// until successive sums agree. Stays finite where `U` itself under- or
/// overflows.
fn ln_u_integral(a: f64, x: f64) -> Result<f64> {
    let c = a + 0.5;
    // peak of (a+1/2) v - e^{2v}/2 - x e^v
    let disc = (x * x + 4.0 * c).sqrt();
    let t_star = if x > 0.0 { 2.0 * c / (x + disc) } else { 0.5 * (disc - x) };
    let v_star = t_star.ln();
    let psi = |v: f64| {
        let t = v.exp();
        c * v - 0.5 * t * t - x * t
    };
    let psi_star = psi(v_star);
    let width = 1.0 / (t_star * t_star + c).sqrt();

    const DEPTH: f64 = 60.0;
    let reach = |dir: f64| {
        let mut d = width;
        while psi(v_star + dir * d) - psi_star > -DEPTH {
            d *= 2.0;
        }
        d
    };
    let left = reach(-1.0);
    let right = reach(1.0);

    let trapezoid = |h: f64| {
        let n_left = (left / h).ceil() as i64;
        let n_right = (right / h).ceil() as i64;
        let mut acc = CompensatedSum::default();
        for k in -n_left..=n_right {
            acc.add((psi(v_star + k as f64 * h) - psi_star).exp());
        }
        h * acc.value()
    };

    let mut h = (0.5 * width).min(0.25);
    let mut prev = trapezoid(h);
    for _ in 0..8 {
        h *= 0.5;
        let cur = trapezoid(h);
        if (cur - prev).abs() <= 1e-9 * cur {
            return Ok(-0.25 * x * x - log_gamma(c)? + psi_star + cur.ln());
        }
        prev = cur;
    }
    Err(Error::Accuracy {
        what: format!("U({a}, {x}) integral did not converge"),
        partial: (-0.25 * x * x - log_gamma(c)? + psi_star + prev.ln()).exp(),
    })
}

/// `ln U(a, x)` for `a > -1/2` (where `U > 0`), usable far beyond the
/// double-precision range of `U`.
pub fn ln_pcf_u(a: f64, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    policy.validate()?;
    check_args("ln_pcf_u", &[a, x])?;
    if !(a > -0.5) {
        let u = pcf_u(a, x, policy)?;
        if u > 0.0 {
            return Ok(u.ln());
        }
        return Err(Error::Domain(format!("U({a}, {x}) = {u} is not positive")));
    }
    if x == 0.0 {
        return Ok(0.5 * PI.ln() - (a / 2.0 + 0.25) * std::f64::consts::LN_2 - log_gamma(0.75 + a / 2.0)?);
    }
    if a.abs() < 50.0 && x.abs() < 30.0 {
        let (v, err) = u_kummer(a, x, policy)?;
        if err <= policy.tol && v > 0.0 {
            return Ok(v.ln());
        }
    }
    ln_u_integral(a, x)
}

/// `U(a, x)`: Kummer representation for moderate `x`, the large-`x`
/// expansion past the switch radius, an integral representation where the
/// Kummer form cancels, and downward recurrence in `a` below `a = -1/2`.
pub fn pcf_u(a: f64, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    policy.validate()?;
    check_args("pcf_u", &[a, x])?;
    if x == 0.0 {
        return Ok(u_at_zero(a));
    }
    if x >= policy.pcf_switch {
        if let Some(v) = u_asymptotic(a, x, policy) {
            return Ok(v);
        }
    }
    let kummer = u_kummer(a, x, policy);
    if let Ok((v, err)) = kummer {
        if err <= policy.tol {
            return Ok(v);
        }
    }
    if a > -0.5 {
        return Ok(ln_u_integral(a, x)?.exp());
    }
    // U(a-1, x) = x U(a, x) + (a + 1/2) U(a+1, x)
    let n = (-0.5 - a).floor() + 1.0;
    let top = a + n;
    let mut hi = ln_u_integral(top + 1.0, x)?.exp();
    let mut lo = ln_u_integral(top, x)?.exp();
    let mut b = top;
    while b > a + 0.5 {
        let next = x * lo + (b + 0.5) * hi;
        hi = lo;
        lo = next;
        b -= 1.0;
    }
    if lo.is_finite() {
        Ok(lo)
    } else {
        Err(Error::Accuracy {
            what: format!("U({a}, {x}) recurrence overflow"),
            partial: kummer.map(|k| k.0).unwrap_or(f64::NAN),
        })
    }
}

/// `U'(a, x) = (x/2) U(a, x) - U(a-1, x)`.
pub fn pcf_u_deriv(a: f64, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    policy.validate()?;
    check_args("pcf_u_deriv", &[a, x])?;
    if x == 0.0 {
        return Ok(u_deriv_at_zero(a));
    }
    Ok(0.5 * x * pcf_u(a, x, policy)? - pcf_u(a - 1.0, x, policy)?)
}

/// `V(a, x)`, the solution growing like `√(2/π) e^{x²/4} x^{a-1/2}`.
///
/// Written with reciprocal gammas, the coefficients of the even and odd
/// solutions are entire in `a`, so no value of `a` is singular.
pub fn pcf_v(a: f64, x: f64, policy: &AccuracyPolicy) -> Result<f64> {
    policy.validate()?;
    check_args("pcf_v", &[a, x])?;
    let scale = ((a / 2.0 + 1.0) * std::f64::consts::LN_2).exp();
    let phase = 0.25 + a / 2.0;
    let c1 = scale * 2f64.powf(-0.75) * sin_pi(phase) * rgamma(0.75 - a / 2.0);
    let c2 = scale * 2f64.powf(-0.25) * cos_pi(phase) * rgamma(0.25 - a / 2.0);
    if x == 0.0 {
        return Ok(c1);
    }
    let y = even_odd(a, x, policy)?;
    let (v, err) = combine([c1, c2], y);
    if err > policy.tol {
        return Err(Error::Accuracy {
            what: format!("V({a}, {x}) lost precision to cancellation"),
            partial: v,
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn u_at_origin_matches_closed_form() {
        let p = AccuracyPolicy::default();
        let u = pcf_u(1.0, 0.0, &p).unwrap();
        let want = SQRT_PI / (2f64.powf(0.75) * super::super::gamma(1.25).unwrap());
        assert!(rel(u, want) < 1e-14);
        let tiny = pcf_u(1.0, 1e-9, &p).unwrap();
        assert!(rel(tiny, want) < 1e-8);
    }

    #[test]
    fn u_minus_half_is_gaussian() {
        let p = AccuracyPolicy::default();
        for x in [0.3, 1.0, 2.5, 6.0, 9.0] {
            let got = pcf_u(-0.5, x, &p).unwrap();
            assert!(rel(got, (-x * x / 4.0).exp()) < 1e-12, "x={x}: {got}");
        }
    }

    #[test]
    fn ln_u_large_order() {
        let p = AccuracyPolicy::default();
        let cases = [
            (199.5, 0.2, -433.00282352529601006),
            (199.5, 2.0, -458.45166344639768944),
            (1999.5, 0.5, -6623.6070006207300973),
            (99.5, 10.0, -284.442749048626926),
            (0.25, 40.0, -402.76706917167867698),
            (-0.25, 1.5, -0.70911257867303139761),
        ];
        for (a, x, want) in cases {
            let got = ln_pcf_u(a, x, &p).unwrap();
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "a={a} x={x}: {got} vs {want}");
        }
    }
}
