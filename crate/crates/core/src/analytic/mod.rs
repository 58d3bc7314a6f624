//! Exact Laplace-domain solution for the unit step rate, its two asymptotic
//! regimes and numerical Laplace inversion.
//!
//! With `Λ(x) = 1` for `x >= 0` and `0` otherwise, the transformed density
//! solves a Weber equation on each half-line. The decaying solutions are
//! parabolic cylinder functions `U`, glued at the origin by continuity and a
//! unit jump of the derivative. Everything here is evaluated through
//! log-gamma differences so that `(s+1)/2ε` may reach `10⁵` and beyond.

mod inversion;

pub use inversion::{
    inverse_laplace, InversionMethod, InversionPolicy, InversionResult, LaplaceTransform,
    WorkingPrecision,
};

use num_complex::Complex64;

use crate::dd::DoubleDouble;
use crate::error::{domain, Error, Result};
use crate::rate::RateSpec;
use crate::specfun::{i0_minus_i1_scaled, ln_gamma_half_ratio, ln_pcf_u, log_gamma, AccuracyPolicy};

const LN_2: f64 = std::f64::consts::LN_2;
const LN_PI: f64 = 1.144_729_885_849_400_174_1;

/// The killed OU model with the unit step rate, in the Laplace domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceModel {
    eps: f64,
}

impl LaplaceModel {
    /// Model with drift strength `eps ∈ (0, 1)`.
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(domain(format!("Laplace model needs eps in (0, 1), got {eps}")));
        }
        Ok(Self { eps })
    }

    /// Model for a given rate; only the unit step rate has a closed form.
    pub fn for_rate(eps: f64, rate: &RateSpec) -> Result<Self> {
        if !rate.is_unit_step() {
            return Err(Error::Unsupported(
                "closed-form Laplace solution exists only for the unit step rate".into(),
            ));
        }
        Self::new(eps)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn digamma_ratio(&self, s: f64) -> Result<f64> {
        digamma_ratio(s, self.eps)
    }

    pub fn n_hat(&self, s: f64) -> Result<f64> {
        n_hat(s, self.eps)
    }

    pub fn f_hat(&self, x: f64, s: f64) -> Result<FHat> {
        f_hat(x, s, self.eps)
    }

    pub fn connection(&self, s: f64) -> Result<Connection> {
        connection(s, self.eps)
    }

    /// `n̂` as a transform that can be handed to [`inverse_laplace`].
    pub fn density_transform(&self) -> DensityTransform {
        DensityTransform { eps: self.eps }
    }

    /// `(1 - n̂(s)) / s`, the transform of the survival function.
    pub fn survival_transform(&self) -> SurvivalTransform {
        SurvivalTransform { eps: self.eps }
    }
}

fn check_s(s: f64, eps: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(domain(format!("Laplace frequency must be finite and >= 0, got {s}")));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(domain(format!("drift strength must be positive, got {eps}")));
    }
    Ok(())
}

/// `Ϝ(s; ε) = Γ(α) Γ(β + 1/2) / (Γ(β) Γ(α + 1/2))` with `α = (s+1)/2ε` and
/// `β = s/2ε`; zero at `s = 0`.
pub fn digamma_ratio(s: f64, eps: f64) -> Result<f64> {
    check_s(s, eps)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let alpha = (s + 1.0) / (2.0 * eps);
    let beta = s / (2.0 * eps);
    Ok((ln_gamma_half_ratio(beta)? - ln_gamma_half_ratio(alpha)?).exp())
}

/// `n̂(s; ε) = 1 / ((s+1)(1 + Ϝ(s; ε)))`, the Laplace transform of the
/// waiting-time density.
pub fn n_hat(s: f64, eps: f64) -> Result<f64> {
    let f = digamma_ratio(s, eps)?;
    Ok(1.0 / ((s + 1.0) * (1.0 + f)))
}

/// Constants gluing the two half-line solutions at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connection {
    /// `ln A(s)`, amplitude on `x >= 0`, from solving the connection system.
    pub ln_a: f64,
    /// `ln B(s)`, amplitude on `x < 0`.
    pub ln_b: f64,
    /// `ln A(s)` from its closed form, for cross-checking.
    pub ln_a_closed: f64,
    /// `ln f̂(0)`.
    pub ln_value_at_zero: f64,
    /// `-U(a-1, 0)/U(a, 0)` type ratios: `f̂'(0±) / f̂(0)`.
    pub slope_ratio_right: f64,
    pub slope_ratio_left: f64,
}

/// `ln U(a, 0)` with `a/2 + 1/4 = z`: `ln √π - z ln 2 - ln Γ(z + 1/2)`.
fn ln_u_origin(z: f64) -> Result<f64> {
    Ok(0.5 * LN_PI - z * LN_2 - log_gamma(z + 0.5)?)
}

/// Solves `[[m00, m01], [m10, m11]] · [p, q] = [r0, r1]`.
fn solve2(m: [[f64; 2]; 2], r: [f64; 2]) -> Result<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Accuracy { what: "singular connection system".into(), partial: det });
    }
    Ok([(r[0] * m[1][1] - m[0][1] * r[1]) / det, (m[0][0] * r[1] - m[1][0] * r[0]) / det])
}

/// Solves value continuity and the unit derivative jump at `x = 0` for the
/// amplitudes `A(s)` and `B(s)`.
///
/// With `p = f̂(0+)` and `q = f̂(0-)` the conditions read `p - q = 0` and
/// `√ε (r₊ p + r₋ q) = 1`, where `r± = U(a±-1, 0)/U(a±, 0) =
/// √2 Γ(z+1/2)/Γ(z)` at `z = (s+1)/2ε` and `z = s/2ε`.
pub fn connection(s: f64, eps: f64) -> Result<Connection> {
    check_s(s, eps)?;
    if s == 0.0 {
        return Err(domain("the connection constants need s > 0"));
    }
    let alpha = (s + 1.0) / (2.0 * eps);
    let beta = s / (2.0 * eps);
    let lg_alpha = ln_gamma_half_ratio(alpha)?;
    let lg_beta = ln_gamma_half_ratio(beta)?;
    // scale out √2 e^{lg_alpha} so the system stays O(1)
    let r_plus = 1.0;
    let r_minus = (lg_beta - lg_alpha).exp();
    let scale = 0.5 * eps.ln() + 0.5 * LN_2 + lg_alpha;
    let [p, q] = solve2([[1.0, -1.0], [r_plus, r_minus]], [0.0, 1.0])?;
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::Accuracy { what: "non-positive connection value".into(), partial: p });
    }
    let ln_p = p.ln() - scale;
    let ln_q = q.ln() - scale;
    let ln_a = ln_p - ln_u_origin(alpha)?;
    let ln_b = ln_q - ln_u_origin(beta)?;

    let fr = r_minus;
    let ln_a_closed = (alpha - 0.5) * LN_2 - 0.5 * (LN_PI + eps.ln()) + log_gamma(alpha)? - fr.ln_1p();
    let slack = 1e-10 + 8.0 * f64::EPSILON * (log_gamma(alpha)?.abs() + ln_a.abs());
    if (ln_a - ln_a_closed).abs() > slack {
        return Err(Error::Accuracy {
            what: format!("A(s) from the connection system disagrees with its closed form at s = {s}"),
            partial: ln_a.exp(),
        });
    }
    let root2_eps = (2.0 * eps).sqrt();
    Ok(Connection {
        ln_a,
        ln_b,
        ln_a_closed,
        ln_value_at_zero: ln_p,
        slope_ratio_right: -root2_eps * lg_alpha.exp(),
        slope_ratio_left: root2_eps * lg_beta.exp(),
    })
}

/// `f̂(x, s)` evaluated in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FHat {
    pub value: f64,
    pub ln_value: f64,
    /// The value is below the smallest double and was flushed to zero.
    pub underflow: bool,
}

impl FHat {
    fn from_ln(ln_value: f64) -> Self {
        let underflow = ln_value < -745.0;
        Self { value: if underflow { 0.0 } else { ln_value.exp() }, ln_value, underflow }
    }
}

fn check_f(x: f64, s: f64, eps: f64) -> Result<()> {
    check_s(s, eps)?;
    if s == 0.0 {
        return Err(domain("f_hat needs s > 0"));
    }
    if !x.is_finite() {
        return Err(domain(format!("f_hat needs finite x, got {x}")));
    }
    Ok(())
}

/// Laplace transform in time of the density of the surviving state:
/// `A e^{-εx²/4} U((s+1)/ε - 1/2, √ε x)` for `x >= 0` and
/// `B e^{-εx²/4} U(s/ε - 1/2, -√ε x)` for `x < 0`.
pub fn f_hat(x: f64, s: f64, eps: f64) -> Result<FHat> {
    check_f(x, s, eps)?;
    let c = connection(s, eps)?;
    let p = AccuracyPolicy::default();
    let y = eps.sqrt() * x;
    let gauss = -0.25 * eps * x * x;
    let ln = if x >= 0.0 {
        c.ln_a + gauss + ln_pcf_u((s + 1.0) / eps - 0.5, y, &p)?
    } else {
        c.ln_b + gauss + ln_pcf_u(s / eps - 0.5, -y, &p)?
    };
    Ok(FHat::from_ln(ln))
}

/// `ln U(a-1, y)` for `a > -1/2`, `y >= 0`, via `U(a-1, y) = y U(a, y) +
/// (a + 1/2) U(a+1, y)` when `a - 1` falls below `-1/2`.
fn ln_u_lowered(a: f64, y: f64, p: &AccuracyPolicy) -> Result<f64> {
    if a - 1.0 > -0.5 {
        return ln_pcf_u(a - 1.0, y, p);
    }
    let l0 = ln_pcf_u(a, y, p)?;
    let l1 = ln_pcf_u(a + 1.0, y, p)?;
    let t1 = if y > 0.0 { y.ln() + l0 } else { f64::NEG_INFINITY };
    let t2 = (a + 0.5).ln() + l1;
    let m = t1.max(t2);
    Ok(m + ((t1 - m).exp() + (t2 - m).exp()).ln())
}

/// `∂f̂/∂x`; one-sided at the origin (`x = 0` gives the right limit, use
/// `-0.0` for the left limit).
pub fn f_hat_deriv(x: f64, s: f64, eps: f64) -> Result<f64> {
    check_f(x, s, eps)?;
    let c = connection(s, eps)?;
    let p = AccuracyPolicy::default();
    let y = eps.sqrt() * x;
    let pre = 0.5 * eps.ln() - 0.25 * eps * x * x;
    if x > 0.0 || (x == 0.0 && x.is_sign_positive()) {
        let l = c.ln_a + pre + ln_u_lowered((s + 1.0) / eps - 0.5, y, &p)?;
        Ok(-l.exp())
    } else {
        let l = c.ln_b + pre + ln_u_lowered(s / eps - 0.5, -y, &p)?;
        Ok(l.exp())
    }
}

/// Intermediate-time density `½ e^{-t/2} [I₀(t/2) - I₁(t/2)]`, the exact
/// inverse of `1 - √(s/(s+1))`; decays like `t^{-3/2}`.
pub fn n0_intermediate(t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(0.5 * i0_minus_i1_scaled(0.5 * t, &AccuracyPolicy::default())?)
}

/// Long-time density `e^{-t}` in unscaled time; the slow-time form follows
/// from `t̃ = ε² t`.
pub fn n0_longtime(t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain(format!("time must be finite and >= 0, got {t}")));
    }
    Ok((-t).exp())
}

/// `n̂(s; ε)` as an invertible transform.
#[derive(Debug, Clone, Copy)]
pub struct DensityTransform {
    eps: f64,
}

impl LaplaceTransform for DensityTransform {
    fn eval(&self, s: f64) -> Result<f64> {
        n_hat(s, self.eps)
    }
}

/// `(1 - n̂(s; ε)) / s`, the transform of `P(T > t)`.
#[derive(Debug, Clone, Copy)]
pub struct SurvivalTransform {
    eps: f64,
}

impl LaplaceTransform for SurvivalTransform {
    fn eval(&self, s: f64) -> Result<f64> {
        check_s(s, self.eps)?;
        if s == 0.0 {
            return Err(domain("survival transform needs s > 0"));
        }
        // 1 - n̂ = (s + (s+1)Ϝ) / ((s+1)(1+Ϝ)) without cancellation
        let f = digamma_ratio(s, self.eps)?;
        Ok((s + (s + 1.0) * f) / ((s + 1.0) * (1.0 + f) * s))
    }
}

/// `1 - √(s/(s+1))`, the small-drift limit of `n̂`, with extended and
/// complex evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntermediateTransform;

impl LaplaceTransform for IntermediateTransform {
    fn eval(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(domain(format!("transform needs s > 0, got {s}")));
        }
        // 1 - √(s/(s+1)) = 1 / ((s+1)(1 + √(s/(s+1))))
        let r = (s / (s + 1.0)).sqrt();
        Ok(1.0 / ((s + 1.0) * (1.0 + r)))
    }

    fn eval_dd(&self, s: DoubleDouble) -> Option<Result<DoubleDouble>> {
        let one = DoubleDouble::from(1.0);
        let r = (s / (s + one)).sqrt();
        Some(Ok(one / ((s + one) * (one + r))))
    }

    fn eval_complex(&self, s: Complex64) -> Option<Result<Complex64>> {
        let one = Complex64::new(1.0, 0.0);
        let r = (s / (s + one)).sqrt();
        Some(Ok(one / ((s + one) * (one + r))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_construction() {
        assert!(LaplaceModel::new(0.0).is_err());
        assert!(LaplaceModel::new(1.0).is_err());
        assert!(LaplaceModel::new(0.01).is_ok());
        assert!(LaplaceModel::for_rate(0.01, &RateSpec::unit_step()).is_ok());
        assert!(matches!(
            LaplaceModel::for_rate(0.01, &RateSpec::arctan(10.0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn ratio_reference_values() {
        // mpmath gamma ratios at 50 digits
        let cases = [
            (0.3, 0.05, 0.46531753345591007992),
            (0.01, 0.01, 0.079589237387178762322),
            (1.0, 0.001, 0.70701839838871744138),
            (5.0, 0.2, 0.91135176588788109452),
        ];
        for (s, e, want) in cases {
            let got = digamma_ratio(s, e).unwrap();
            assert!(((got - want) / want).abs() < 1e-13, "s={s} eps={e}: {got}");
        }
        assert_eq!(digamma_ratio(0.0, 0.1).unwrap(), 0.0);
        assert!(digamma_ratio(-1.0, 0.1).is_err());
    }

    #[test]
    fn closed_form_amplitude_agrees() {
        for (s, e) in [(0.5, 0.01), (1.0, 0.1), (3.0, 1e-3), (0.01, 0.2)] {
            let c = connection(s, e).unwrap();
            assert!((c.ln_a - c.ln_a_closed).abs() < 1e-10 * c.ln_a.abs().max(1.0));
        }
    }

    #[test]
    fn small_drift_limit() {
        for s in [0.1f64, 1.0, 10.0] {
            let want = 1.0 - (s / (s + 1.0)).sqrt();
            assert!((n_hat(s, 1e-5).unwrap() - want).abs() < 1e-3);
        }
    }

    #[test]
    fn intermediate_density_reference() {
        assert!((n0_intermediate(0.0).unwrap() - 0.5).abs() < 1e-15);
        // mpmath: ½ e^{-1} [I0(1) - I1(1)]
        let got = n0_intermediate(2.0).unwrap();
        assert!(((got - 0.12892459612196599382) / got).abs() < 1e-13);
        assert!(n0_intermediate(-1.0).is_err());
    }

    #[test]
    fn long_time_density() {
        assert_eq!(n0_longtime(0.0).unwrap(), 1.0);
        assert!((n0_longtime(2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        for t in [0.0, 3.7, 25.0] {
            let r = n0_longtime(t + 1.0).unwrap() / n0_longtime(t).unwrap();
            assert!((r - (-1f64).exp()).abs() < 1e-14);
        }
    }
}
