//! Laplace-domain solution: reference values, connection conditions,
//! structural invariants and inversion.

use kol_core::analytic::{
    connection, digamma_ratio, f_hat, f_hat_deriv, inverse_laplace, n0_intermediate, n_hat,
    IntermediateTransform, InversionPolicy, LaplaceModel, WorkingPrecision,
};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn density_transform_at_zero_is_total_probability() {
    for eps in [1e-2, 1e-4] {
        assert_eq!(n_hat(0.0, eps).unwrap(), 1.0);
        assert!((n_hat(1e-12, eps).unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn density_transform_reference() {
    // 50-digit gamma evaluation
    assert!(rel(n_hat(1.0, 0.1).unwrap(), 0.29440372235324112444) < 1e-13);
    assert!(rel(digamma_ratio(0.3, 0.05).unwrap(), 0.46531753345591007992) < 1e-13);
}

#[test]
fn ratio_small_drift_limit() {
    let got = digamma_ratio(1.0, 1e-4).unwrap();
    assert!((got - 0.5f64.sqrt()).abs() < 5e-4);
}

#[test]
fn density_transform_decreases() {
    for eps in [1e-1, 1e-2, 1e-3] {
        let mut prev = n_hat(0.0, eps).unwrap();
        for i in 1..=400 {
            let s = 0.25 * i as f64;
            let cur = n_hat(s, eps).unwrap();
            assert!(cur < prev, "eps={eps} s={s}");
            prev = cur;
        }
    }
}

#[test]
fn ratio_stays_in_unit_interval() {
    for eps in [1e-5, 1e-4, 1e-3, 1e-2, 1e-1] {
        for i in 0..=200 {
            let s = 0.5 * i as f64;
            let f = digamma_ratio(s, eps).unwrap();
            assert!((0.0..=1.0).contains(&f), "eps={eps} s={s}: {f}");
        }
    }
}

#[test]
fn connection_conditions_hold() {
    for (s, eps) in [(0.5, 1e-2), (1.0, 1e-2), (2.0, 1e-3), (0.05, 0.1), (10.0, 1e-3)] {
        let right = f_hat(0.0, s, eps).unwrap();
        let left = f_hat(-0.0, s, eps).unwrap();
        let just_left = f_hat(-1e-300, s, eps).unwrap();
        assert!(rel(just_left.value, right.value) < 1e-10, "continuity s={s}");
        assert_eq!(right.value, left.value);
        let jump = f_hat_deriv(0.0, s, eps).unwrap() - f_hat_deriv(-0.0, s, eps).unwrap();
        assert!((jump + 1.0).abs() < 1e-8, "s={s} eps={eps}: jump {jump}");
        let c = connection(s, eps).unwrap();
        assert!((c.ln_a - c.ln_a_closed).abs() < 1e-10 * c.ln_a.abs().max(1.0));
    }
}

#[test]
fn density_transform_vanishes_far_out() {
    assert!(f_hat(20.0, 1.0, 0.01).unwrap().value.abs() < 1e-10);
    // the left tail decays only like exp(-sqrt(s)|x|); 50-digit reference
    let left = f_hat(-20.0, 1.0, 0.01).unwrap().value;
    assert!(rel(left, 3.190943443376762e-10) < 1e-10, "{left}");
    assert!(f_hat(-40.0, 1.0, 0.01).unwrap().value < 1e-17);
}

#[test]
fn density_transform_positive() {
    for s in [0.5, 1.0, 2.0] {
        for eps in [1e-2, 1e-3] {
            for i in 0..=80 {
                let x = -10.0 + 0.25 * i as f64;
                let f = f_hat(x, s, eps).unwrap();
                assert!(f.value > 0.0 && !f.underflow, "x={x} s={s} eps={eps}");
            }
        }
    }
}

#[test]
fn underflow_is_flagged() {
    let f = f_hat(400.0, 5.0, 0.5).unwrap();
    assert!(f.underflow);
    assert_eq!(f.value, 0.0);
    assert!(f.ln_value.is_finite());
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn spatial_integrals_match_density_and_survival() {
    // ∫_{x>=0} f̂ = n̂(s) and ∫ f̂ = (1 - n̂(s)) / s
    for (s, eps) in [(0.5, 0.05), (1.0, 0.01), (2.0, 0.1)] {
        let f = |x: f64| f_hat(x, s, eps).unwrap().value;
        let right = simpson(f, 0.0, 40.0, 4000);
        let left = simpson(f, -80.0, 0.0, 8000);
        let nh = n_hat(s, eps).unwrap();
        assert!(rel(right, nh) < 1e-7, "s={s}: {right} vs {nh}");
        assert!(rel(left + right, (1.0 - nh) / s) < 1e-7, "s={s}");
    }
}

#[test]
fn intermediate_density() {
    assert!((n0_intermediate(0.0).unwrap() - 0.5).abs() < 1e-15);
    assert!(rel(n0_intermediate(2.0).unwrap(), 0.12892459612196599382) < 1e-13);
    let scaled = |t: f64| t.powf(1.5) * n0_intermediate(t).unwrap();
    assert!((scaled(800.0) / scaled(400.0) - 1.0).abs() < 1e-2);
    let mut prev = f64::INFINITY;
    for i in 0..200 {
        let v = n0_intermediate(0.1 * i as f64 * i as f64).unwrap();
        assert!(v > 0.0 && v < prev);
        prev = v;
    }
}

#[test]
fn inversion_of_small_drift_limit() {
    let p = InversionPolicy::gaver_stehfest(20).with_precision(WorkingPrecision::DoubleDouble);
    for t in [1.0, 5.0, 20.0] {
        let got = inverse_laplace(&IntermediateTransform, t, &p).unwrap();
        let want = n0_intermediate(t).unwrap();
        assert!(rel(got.value, want) < 1e-4, "t={t}: {} vs {want}", got.value);
    }
    let talbot = InversionPolicy::talbot(32);
    for t in [1.0, 5.0, 20.0] {
        let got = inverse_laplace(&IntermediateTransform, t, &talbot).unwrap();
        assert!(rel(got.value, n0_intermediate(t).unwrap()) < 1e-8, "talbot t={t}");
    }
}

#[test]
fn inverted_density_nonnegative() {
    let model = LaplaceModel::new(1e-3).unwrap();
    let tr = model.density_transform();
    let p = InversionPolicy::default();
    for i in 0..=40 {
        let t = 0.1 * (500f64).powf(i as f64 / 40.0);
        let v = inverse_laplace(&tr, t, &p).unwrap();
        assert!(v.value >= 0.0, "t={t}: {}", v.value);
    }
}

#[test]
fn inverted_density_integrates_to_one() {
    let model = LaplaceModel::new(1e-2).unwrap();
    let tr = model.density_transform();
    let p = InversionPolicy::default();
    let t_end: f64 = 300.0;
    // log-spaced trapezoid on [t0, T*] plus the short initial piece and an
    // exponential tail bound
    let t0: f64 = 1e-3;
    let n = 2000;
    let ts: Vec<f64> = (0..=n).map(|i| t0 * (t_end / t0).powf(i as f64 / n as f64)).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| inverse_laplace(&tr, t, &p).unwrap().value).collect();
    let mut total = vs[0] * t0;
    for i in 0..n {
        total += 0.5 * (vs[i] + vs[i + 1]) * (ts[i + 1] - ts[i]);
    }
    let decay = (vs[n - 1] / vs[n]).ln() / (ts[n] - ts[n - 1]);
    total += vs[n] / decay;
    assert!((total - 1.0).abs() < 1e-2, "total {total}");
}

#[test]
fn evaluations_are_deterministic() {
    let a = f_hat(1.3, 0.7, 1e-3).unwrap();
    let b = f_hat(1.3, 0.7, 1e-3).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}
