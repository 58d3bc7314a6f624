//! Special functions against 50-digit references and their defining
//! identities.

use kol_core::specfun::{
    bessel_i, bessel_i_scaled, gamma, kummer_m, ln_pcf_u, pcf_u, pcf_u_deriv, pcf_v, rgamma,
    AccuracyPolicy,
};
use kol_core::Error;

const ORACLE: &str = include_str!("oracle/oracle_values.txt");

fn table(tag: &str) -> Vec<Vec<f64>> {
    ORACLE
        .lines()
        .filter_map(|l| l.strip_prefix(tag).and_then(|r| r.strip_prefix(' ')))
        .map(|r| r.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn pol() -> AccuracyPolicy {
    AccuracyPolicy::default()
}

#[test]
fn u_grid_matches_reference() {
    let rows = table("U");
    assert_eq!(rows.len(), 56);
    for r in rows {
        let got = pcf_u(r[0], r[1], &pol()).unwrap();
        assert!(rel(got, r[2]) < 1e-11, "U({}, {}) = {got:e}, want {:e}", r[0], r[1], r[2]);
    }
}

#[test]
fn v_grid_matches_reference() {
    let rows = table("V");
    assert_eq!(rows.len(), 35);
    for r in rows {
        let got = pcf_v(r[0], r[1], &pol()).unwrap();
        assert!(rel(got, r[2]) < 1e-11, "V({}, {}) = {got:e}, want {:e}", r[0], r[1], r[2]);
    }
}

#[test]
fn log_u_matches_reference() {
    for r in table("lnU") {
        let got = ln_pcf_u(r[0], r[1], &pol()).unwrap();
        assert!((got - r[2]).abs() < 1e-12 * r[2].abs().max(1.0), "lnU({}, {})", r[0], r[1]);
    }
}

#[test]
fn u_at_three_for_unit_order() {
    let got = pcf_u(1.0, 3.0, &pol()).unwrap();
    assert!(rel(got, 0.017224293634324898862) < 1e-12);
}

#[test]
fn u_order_minus_half_is_gaussian() {
    for x in [0.1, 0.7, 1.9, 4.0, 7.5, 11.0] {
        let got = pcf_u(-0.5, x, &pol()).unwrap();
        assert!(rel(got, (-x * x / 4.0).exp()) < 1e-12, "x={x}");
    }
}

#[test]
fn u_value_and_slope_at_origin() {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    for a in [-2.3, -1.0, -0.5, 0.0, 0.7, 1.5, 4.0] {
        let u0 = sqrt_pi / (2f64.powf(a / 2.0 + 0.25)) * rgamma(0.75 + a / 2.0);
        let d0 = -sqrt_pi / (2f64.powf(a / 2.0 - 0.25)) * rgamma(a / 2.0 + 0.25);
        let u = pcf_u(a, 1e-10, &pol()).unwrap();
        let d = pcf_u_deriv(a, 1e-10, &pol()).unwrap();
        assert!((u - u0).abs() < 1e-9 * u0.abs().max(1.0), "U({a}, 0+)");
        assert!((d - d0).abs() < 1e-9 * d0.abs().max(1.0), "U'({a}, 0+)");
        assert!((pcf_u_deriv(a, 0.0, &pol()).unwrap() - d0).abs() <= 1e-14 * d0.abs());
    }
    // Γ(a/2 + 1/4) has a pole at a = -1/2: the slope limit is zero
    assert_eq!(pcf_u_deriv(-0.5, 0.0, &pol()).unwrap(), 0.0);
    assert!(pcf_u_deriv(-0.5, 1e-8, &pol()).unwrap().abs() < 1e-8);
    assert_eq!(pcf_u_deriv(-4.5, 0.0, &pol()).unwrap(), 0.0);
}

fn second_derivative(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

fn grid() -> impl Iterator<Item = (f64, f64)> {
    (0..=14).flat_map(|i| {
        let a = -2.0 + 0.5 * i as f64;
        (0..=20).map(move |j| (a, 0.25 * j as f64))
    })
}

#[test]
fn weber_equation_residual() {
    let h = 1e-2;
    for (a, x) in grid() {
        for (name, f) in [
            ("U", &(|t: f64| pcf_u(a, t, &pol()).unwrap()) as &dyn Fn(f64) -> f64),
            ("V", &|t: f64| pcf_v(a, t, &pol()).unwrap()),
        ] {
            let d2 = second_derivative(f, x, h);
            let res = (d2 - (x * x / 4.0 + a) * f(x)).abs();
            assert!(res <= 1e-6 * (1.0 + d2.abs()), "{name}({a}, {x}): residual {res:e}");
        }
    }
}

#[test]
fn derivative_matches_central_difference() {
    let h = 1e-5;
    for (a, x) in grid() {
        if x < 2.0 * h {
            continue;
        }
        let fd = (pcf_u(a, x + h, &pol()).unwrap() - pcf_u(a, x - h, &pol()).unwrap()) / (2.0 * h);
        let d = pcf_u_deriv(a, x, &pol()).unwrap();
        // relative to the local scale of U where U' crosses zero
        let scale = d.abs().max(pcf_u(a, x, &pol()).unwrap().abs());
        assert!((fd - d).abs() <= 1e-6 * scale, "U'({a}, {x}): {d:e} vs {fd:e}");
    }
}

#[test]
fn large_argument_ratios() {
    let x = 30.0f64;
    for a in [-1.5, 0.0, 1.0, 2.5] {
        let u = pcf_u(a, x, &pol()).unwrap();
        let lead_u = (-x * x / 4.0).exp() * x.powf(-a - 0.5);
        assert!((u / lead_u - 1.0).abs() < 1e-2, "U({a}, 30)");
        let v = pcf_v(a, x, &pol()).unwrap();
        let lead_v = (2.0 / std::f64::consts::PI).sqrt() * (x * x / 4.0).exp() * x.powf(a - 0.5);
        assert!((v / lead_v - 1.0).abs() < 1e-2, "V({a}, 30)");
    }
}

#[test]
fn v_is_regular_where_reflection_gamma_has_poles() {
    // Γ(1/2 - a) is singular at a = 1/2, 3/2, ...; V itself is entire in a.
    for a in [0.5, 1.5, 2.5] {
        let at = pcf_v(a, 1.0, &pol()).unwrap();
        let near = pcf_v(a + 1e-9, 1.0, &pol()).unwrap();
        assert!(at.is_finite());
        assert!(rel(near, at) < 1e-7, "a={a}");
    }
    assert!(rel(pcf_v(0.5, 1.0, &pol()).unwrap(), 1.0245040556536147945) < 1e-12);
}

#[test]
fn kummer_limits() {
    for (a, b) in [(0.5, 1.5), (-3.2, 0.4), (7.0, 2.0), (1.0, -0.5)] {
        assert_eq!(kummer_m(a, b, 0.0, &pol()).unwrap(), 1.0);
    }
    for z in [-10.0, -1.0, 0.3, 12.0, 60.0] {
        assert!(rel(kummer_m(2.5, 2.5, z, &pol()).unwrap(), f64::exp(z)) < 1e-13);
    }
    assert!(rel(kummer_m(0.5, 1.5, 2.0, &pol()).unwrap(), 2.3644538928052092846) < 1e-14);
    assert!(matches!(kummer_m(1.0, -1.0, 0.5, &pol()), Err(Error::Pole(_))));
}

#[test]
fn kummer_slope_at_origin() {
    let h = 1e-7;
    for (a, b) in [(0.5, 1.5), (2.0, 0.25), (-1.7, 3.0)] {
        let d = (kummer_m(a, b, h, &pol()).unwrap() - kummer_m(a, b, -h, &pol()).unwrap()) / (2.0 * h);
        assert!((d - a / b).abs() < 1e-8);
    }
}

#[test]
fn bessel_reference() {
    assert!(rel(bessel_i(0, 1.0, &pol()).unwrap(), 1.2660658777520083356) < 1e-14);
    for r in table("I") {
        assert!(rel(bessel_i_scaled(0, r[0], &pol()).unwrap(), r[1]) < 1e-13);
        assert!(rel(bessel_i_scaled(1, r[0], &pol()).unwrap(), r[2]) < 1e-13);
    }
}

#[test]
fn switch_radii_are_seamless() {
    // each switch point was chosen where both branches reach full accuracy
    let p = pol();
    let series_u = AccuracyPolicy { pcf_switch: 1e9, ..p };
    for a in [-1.5, 0.0, 1.0] {
        for x in [p.pcf_switch, p.pcf_switch + 0.5, 10.0] {
            let x1 = pcf_u(a, x, &p).unwrap();
            let x2 = pcf_u(a, x, &series_u).unwrap();
            assert!(rel(x1, x2) < 1e-11, "U({a}, {x})");
        }
    }
    let series_i = AccuracyPolicy { bessel_switch: 1e9, ..p };
    for x in [p.bessel_switch, 25.0, 30.0] {
        for order in [0, 1] {
            let x1 = bessel_i_scaled(order, x, &p).unwrap();
            let x2 = bessel_i_scaled(order, x, &series_i).unwrap();
            assert!(rel(x1, x2) < 1e-13, "I{order}({x})");
        }
    }
    let series_m = AccuracyPolicy { kummer_switch: 1e9, ..p };
    for z in [p.kummer_switch, 50.0, 80.0] {
        let x1 = kummer_m(0.75, 1.5, z, &p).unwrap();
        let x2 = kummer_m(0.75, 1.5, z, &series_m).unwrap();
        assert!(rel(x1, x2) < 1e-12, "M at {z}");
    }
}

#[test]
fn policy_is_validated() {
    let bad_tol = AccuracyPolicy { tol: 1e-3, ..pol() };
    assert!(matches!(pcf_u(1.0, 1.0, &bad_tol), Err(Error::Config(_))));
    let bad_terms = AccuracyPolicy { max_terms: 10, ..pol() };
    assert!(matches!(kummer_m(1.0, 1.0, 1.0, &bad_terms), Err(Error::Config(_))));
}

#[test]
fn evaluations_are_bit_identical() {
    for (a, x) in [(0.3, 2.2), (-1.7, 6.5), (40.0, 3.0)] {
        let u1 = pcf_u(a, x, &pol()).unwrap();
        let u2 = pcf_u(a, x, &pol()).unwrap();
        assert_eq!(u1.to_bits(), u2.to_bits());
        let v1 = pcf_v(a.min(5.0), x.min(5.0), &pol()).unwrap();
        let v2 = pcf_v(a.min(5.0), x.min(5.0), &pol()).unwrap();
        assert_eq!(v1.to_bits(), v2.to_bits());
    }
    assert!(rel(gamma(0.5).unwrap(), std::f64::consts::PI.sqrt()) < 1e-15);
}
