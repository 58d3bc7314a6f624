//! Rate functions `Λ(x)` driving the Poisson clock.
//!
//! A [`RateSpec`] is an immutable description; evaluation is pure and can be
//! shared freely between sampling workers.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default ceiling applied to the exponential family.
pub const DEFAULT_EXPONENTIAL_CAP: f64 = 1e6;

fn default_cap() -> f64 {
    DEFAULT_EXPONENTIAL_CAP
}

/// Tagged description of a rate function.
///
/// Serialized as a JSON object with a `kind` discriminator; see
/// `schemas/rate_spec.schema.json` for the field list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RateSpec {
    /// `level` for `x >= 0`, zero for `x < 0`.
    #[serde(rename = "piecewise")]
    PiecewiseConstant { level: f64 },
    /// `atan(stiffness * x) + offset`.
    Arctan { stiffness: f64, offset: f64 },
    /// `min(cap, prefactor * exp(-sensitivity * (x - reference) / reference))`.
    Exponential {
        prefactor: f64,
        sensitivity: f64,
        reference: f64,
        #[serde(default = "default_cap")]
        cap: f64,
    },
    /// Piecewise-linear through `(x, rate)` knots, clamped outside the range.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl RateSpec {
    /// The unit step rate: 1 on `[0, ∞)`, 0 on `(-∞, 0)`.
    pub fn unit_step() -> Self {
        RateSpec::PiecewiseConstant { level: 1.0 }
    }

    /// `atan(stiffness * x) + π/2`, the smooth family used for stiffness sweeps.
    pub fn arctan(stiffness: f64) -> Self {
        RateSpec::Arctan {
            stiffness,
            offset: FRAC_PI_2,
        }
    }

    /// A rate equal to `c` everywhere.
    pub fn constant(c: f64) -> Self {
        RateSpec::Tabulated {
            knots: vec![(0.0, c)],
        }
    }

    /// True when this is exactly the unit step rate.
    pub fn is_unit_step(&self) -> bool {
        matches!(self, RateSpec::PiecewiseConstant { level } if *level == 1.0)
    }

    /// Evaluates `Λ(x)` without checking `x`. Callers guarantee finiteness.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RateSpec::PiecewiseConstant { level } => {
                if x >= 0.0 {
                    *level
                } else {
                    0.0
                }
            }
            RateSpec::Arctan { stiffness, offset } => (stiffness * x).atan() + offset,
            RateSpec::Exponential {
                prefactor,
                sensitivity,
                reference,
                cap,
            } => {
                let r = prefactor * (-sensitivity * (x - reference) / reference).exp();
                r.min(*cap)
            }
            RateSpec::Tabulated { knots } => interpolate_clamped(knots, x),
        }
    }

    /// Upper bound on `Λ` over the real line, when one exists.
    pub fn upper_bound(&self) -> Option<f64> {
        match self {
            RateSpec::PiecewiseConstant { level } => Some(level.max(0.0)),
            RateSpec::Arctan { offset, .. } => Some(offset + FRAC_PI_2),
            RateSpec::Exponential { cap, .. } => Some(*cap),
            RateSpec::Tabulated { knots } => knots.iter().map(|k| k.1).reduce(f64::max),
        }
    }
}

fn interpolate_clamped(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let hi = knots.partition_point(|k| k.0 <= x);
    let (x0, r0) = knots[hi - 1];
    let (x1, r1) = knots[hi];
    r0 + (r1 - r0) * (x - x0) / (x1 - x0)
}

/// Evaluates `Λ(x)`, rejecting non-finite states.
pub fn eval_rate(spec: &RateSpec, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(format!("rate evaluated at non-finite state {x}")));
    }
    Ok(spec.eval(x))
}

/// Outcome of [`validate_rate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub nonnegative: bool,
    pub bounded: bool,
    pub bound: Option<f64>,
    /// `Λ >= C₊ > 0` on `[0, ∞)` and `Λ = 0` on `(-∞, 0)`.
    pub strictly_admissible: bool,
    /// Largest `C₊` when strictly admissible.
    pub c_plus: Option<f64>,
    /// Accepted for simulation (nonnegative, finite, bounded).
    pub accepted: bool,
    pub note: String,
}

/// Checks nonnegativity, boundedness and strict admissibility of a rate.
pub fn validate_rate(spec: &RateSpec) -> Result<AdmissibilityReport> {
    let invalid = |m: String| Err(Error::InvalidSpec(m));
    match spec {
        RateSpec::PiecewiseConstant { level } => {
            if !level.is_finite() || *level < 0.0 {
                return invalid(format!("piecewise level {level} must be finite and >= 0"));
            }
            let admissible = *level > 0.0;
            Ok(AdmissibilityReport {
                nonnegative: true,
                bounded: true,
                bound: Some(*level),
                strictly_admissible: admissible,
                c_plus: admissible.then_some(*level),
                accepted: true,
                note: if admissible {
                    "step rate".into()
                } else {
                    "identically zero: the clock never fires".into()
                },
            })
        }
        RateSpec::Arctan { stiffness, offset } => {
            if !stiffness.is_finite() || !offset.is_finite() {
                return invalid("arctan parameters must be finite".into());
            }
            if *stiffness < 0.0 {
                return invalid(format!("arctan stiffness {stiffness} must be >= 0"));
            }
            // inf over x of atan(kx) is -π/2 (or 0 when k = 0)
            let floor = if *stiffness > 0.0 { offset - FRAC_PI_2 } else { *offset };
            if floor < -1e-15 {
                return invalid(format!("arctan offset {offset} gives negative rates"));
            }
            Ok(AdmissibilityReport {
                nonnegative: true,
                bounded: true,
                bound: spec.upper_bound(),
                strictly_admissible: false,
                c_plus: None,
                accepted: true,
                note: "smooth rate, positive on the negative half-line; accepted but not strictly admissible"
                    .into(),
            })
        }
        RateSpec::Exponential {
            prefactor,
            sensitivity,
            reference,
            cap,
        } => {
            if ![*prefactor, *sensitivity, *reference, *cap]
                .iter()
                .all(|v| v.is_finite())
            {
                return invalid("exponential parameters must be finite".into());
            }
            if *prefactor < 0.0 {
                return invalid(format!("exponential prefactor {prefactor} must be >= 0"));
            }
            if *reference == 0.0 {
                return invalid("exponential reference state must be nonzero".into());
            }
            if *cap <= 0.0 {
                return invalid(format!("exponential cap {cap} must be > 0"));
            }
            Ok(AdmissibilityReport {
                nonnegative: true,
                bounded: true,
                bound: Some(*cap),
                strictly_admissible: false,
                c_plus: None,
                accepted: true,
                note: "exponential family, capped; accepted but not strictly admissible".into(),
            })
        }
        RateSpec::Tabulated { knots } => {
            if knots.is_empty() {
                return invalid("tabulated rate needs at least one knot".into());
            }
            for w in knots.windows(2) {
                if !(w[0].0 < w[1].0) {
                    return invalid("tabulated knots must be strictly increasing in x".into());
                }
            }
            for &(x, r) in knots {
                if !x.is_finite() || !r.is_finite() {
                    return invalid("tabulated knots must be finite".into());
                }
                if r < 0.0 {
                    return invalid(format!("tabulated rate {r} at x = {x} is negative"));
                }
            }
            // The interpolant is linear between knots, so its extrema on
            // either half-line sit at knots or at x = 0.
            let at_zero = interpolate_clamped(knots, 0.0);
            // A segment straddling zero is positive somewhere on (x_{j-1}, 0)
            // unless both ends vanish.
            let straddle = knots
                .windows(2)
                .find(|w| w[0].0 < 0.0 && w[1].0 > 0.0)
                .map(|w| w[0].1.max(w[1].1))
                .unwrap_or(0.0);
            let zero_left = knots[0].1 == 0.0
                && knots.iter().filter(|k| k.0 < 0.0).all(|k| k.1 == 0.0)
                && straddle == 0.0;
            let pos_min = knots
                .iter()
                .filter(|k| k.0 >= 0.0)
                .map(|k| k.1)
                .chain([at_zero, knots[knots.len() - 1].1])
                .fold(f64::INFINITY, f64::min);
            let admissible = zero_left && pos_min > 0.0;
            Ok(AdmissibilityReport {
                nonnegative: true,
                bounded: true,
                bound: spec.upper_bound(),
                strictly_admissible: admissible,
                c_plus: admissible.then_some(pos_min),
                accepted: true,
                note: "tabulated, clamped linear interpolation".into(),
            })
        }
    }
}
