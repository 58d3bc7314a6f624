//! Log-gamma, reciprocal gamma and the half-step gamma ratio.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_1;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_780_329_7;

/// `ζ(k) - 1` for `k = 2..=30`.
const ZETA_MINUS_ONE: [f64; 29] = [
    0.644_934_066_848_226_436_47,
    0.202_056_903_159_594_285_4,
    0.082_323_233_711_138_191_516,
    0.036_927_755_143_369_926_331,
    0.017_343_061_984_449_139_715,
    0.008_349_277_381_922_826_839_8,
    0.004_077_356_197_944_339_378_7,
    0.002_008_392_826_082_214_417_9,
    0.000_994_575_127_818_085_337_15,
    0.000_494_188_604_119_464_558_7,
    0.000_246_086_553_308_048_298_64,
    0.000_122_713_347_578_489_146_75,
    6.124_813_505_870_482_925_9e-5,
    3.058_823_630_702_049_355_2e-5,
    1.528_225_940_865_187_173_3e-5,
    7.637_197_637_899_762_273_6e-6,
    3.817_293_264_999_839_856_5e-6,
    1.908_212_716_553_938_925_7e-6,
    9.539_620_338_727_961_131_5e-7,
    4.769_329_867_878_064_631_2e-7,
    2.384_505_027_277_329_9e-7,
    1.192_199_259_653_110_730_7e-7,
    5.960_818_905_125_947_961_2e-8,
    2.980_350_351_465_228_018_6e-8,
    1.490_155_482_836_504_123_5e-8,
    7.450_711_789_835_429_492e-9,
    3.725_334_024_788_457_054_8e-9,
    1.862_659_723_513_049_006_4e-9,
    9.313_274_324_196_681_828_7e-10,
];

/// `B_{2k} / (2k (2k - 1))` for `k = 1..=8`.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// `Σ_{k≥2} (-1)^k (ζ(k) - 1) x^k / k`, valid for `|x| <= 1/2`.
fn zeta_tail(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut pow = x;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate() {
        pow *= x;
        let k = (i + 2) as f64;
        let term = c * pow / k;
        acc += if i % 2 == 0 { term } else { -term };
        if term.abs() < 1e-18 * acc.abs() {
            break;
        }
    }
    acc
}

/// `ln Γ(1 + x)` for `|x| <= 1/2`.
fn ln_gamma_1p(x: f64) -> f64 {
    -x.ln_1p() + x * (1.0 - EULER_GAMMA) + zeta_tail(x)
}

/// `ln Γ(2 + x)` for `|x| <= 1/2`; the logarithmic parts cancel analytically.
fn ln_gamma_2p(x: f64) -> f64 {
    x * (1.0 - EULER_GAMMA) + zeta_tail(x)
}

fn stirling(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in STIRLING {
        corr += c * p;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + corr
}

fn ln_gamma_positive(z: f64) -> f64 {
    if z < 0.5 {
        ln_gamma_1p(z) - z.ln()
    } else if z < 1.5 {
        ln_gamma_1p(z - 1.0)
    } else if z < 2.5 {
        ln_gamma_2p(z - 2.0)
    } else if z < 10.0 {
        let mut prod = 1.0;
        let mut w = z;
        while w >= 2.5 {
            w -= 1.0;
            prod *= w;
        }
        ln_gamma_2p(w - 2.0) + prod.ln()
    } else {
        stirling(z)
    }
}

/// `ln Γ(z)` for `z > 0`.
pub fn log_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain(format!("log_gamma needs z > 0, got {z}")));
    }
    Ok(ln_gamma_positive(z))
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x % 2.0;
    let r = if r > 1.0 {
        r - 2.0
    } else if r < -1.0 {
        r + 2.0
    } else {
        r
    };
    // r in [-1, 1]
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `cos(πx)` with exact zeros at the half-integers.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `(ln |Γ(x)|, sign Γ(x))` for real `x` off the poles.
pub fn ln_gamma_abs(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(domain(format!("gamma of non-finite {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(crate::Error::Pole(format!("Γ has a pole at {x}")));
    }
    if x > 0.0 {
        return Ok((ln_gamma_positive(x), 1.0));
    }
    // Γ(x) = π / (sin(πx) Γ(1 - x))
    let s = sin_pi(x);
    Ok((PI.ln() - s.abs().ln() - ln_gamma_positive(1.0 - x), s.signum()))
}

/// `1/Γ(x)`, an entire function: zero at the poles of `Γ`.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x >= 0.5 {
        return (-ln_gamma_positive(x)).exp();
    }
    sin_pi(x) * ln_gamma_positive(1.0 - x).exp() / PI
}

/// `Γ(x)` for real `x` off the poles.
pub fn gamma(x: f64) -> Result<f64> {
    let (l, s) = ln_gamma_abs(x)?;
    Ok(s * l.exp())
}

/// `ln Γ(z + 1/2) - ln Γ(z)` for `z > 0`, accurate for large `z` where the
/// two log-gammas would cancel.
pub fn ln_gamma_half_ratio(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain(format!("gamma ratio needs z > 0, got {z}")));
    }
    if z < 10.0 {
        let mut w = z;
        let mut shift = 0.0;
        while w < 10.0 {
            shift += (0.5 / w).ln_1p();
            w += 1.0;
        }
        return Ok(half_ratio_large(w) - shift);
    }
    Ok(half_ratio_large(z))
}

/// `ln(1 + u) - u` without cancellation for small `u`.
fn ln1p_minus(u: f64) -> f64 {
    if u.abs() > 0.05 {
        return u.ln_1p() - u;
    }
    let mut acc = 0.0;
    let mut p = u;
    for k in 2..30 {
        p *= -u;
        let term = p / k as f64;
        acc += term;
        if term.abs() < 1e-18 * acc.abs() {
            break;
        }
    }
    acc
}

fn half_ratio_large(z: f64) -> f64 {
    let u = 0.5 / z;
    // z ln(1 + u) - 1/2 = (ln(1+u) - u) / (2u)
    let lead = ln1p_minus(u) / (2.0 * u) + 0.5 * z.ln();
    let l1p = u.ln_1p();
    let mut corr = 0.0;
    let mut zp = z;
    for (i, c) in STIRLING.iter().enumerate() {
        let k = (i + 1) as f64;
        // (z + 1/2)^{1-2k} - z^{1-2k}
        let diff = ((1.0 - 2.0 * k) * l1p).exp_m1() / zp;
        corr += c * diff;
        zp *= z * z;
    }
    lead + corr
}
