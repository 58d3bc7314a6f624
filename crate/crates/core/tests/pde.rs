//! Fokker–Planck solver: conservation, exact killing, positivity, the
//! density–survival relation and grid convergence.

use kol_core::pde::{solve_fokker_planck, survival_from_pde, FPGrid};
use kol_core::rate::RateSpec;
use kol_core::sde::OUParams;
use kol_core::Error;
use proptest::prelude::*;

fn step_model(eps: f64) -> (OUParams, RateSpec) {
    (OUParams::new(eps, 0.0).unwrap(), RateSpec::unit_step())
}

#[test]
fn heat_equation_conserves_mass() {
    let p = OUParams::new(0.0, 0.0).unwrap();
    let g = FPGrid::symmetric(40.0, 0.1, 1e-2, 20.0);
    let s = solve_fokker_planck(&p, &RateSpec::constant(0.0), &g).unwrap();
    assert!(s.survival.iter().all(|n| (n - 1.0).abs() <= 1e-6));
    assert!(s.density.iter().all(|&n| n == 0.0));
    assert!(s.boundary_adequate);
}

#[test]
fn constant_killing_is_exponential() {
    for c in [0.5, 2.0] {
        let p = OUParams::new(0.1, 0.3).unwrap();
        let g = FPGrid::symmetric(30.0, 0.1, 1e-2, 5.0 / c);
        let s = solve_fokker_planck(&p, &RateSpec::constant(c), &g).unwrap();
        for (t, n) in s.times.iter().zip(&s.density) {
            let want = c * (-c * t).exp();
            assert!((n / want - 1.0).abs() < 1e-3, "c={c} t={t}: {n} vs {want}");
        }
    }
}

#[test]
fn density_is_minus_survival_slope() {
    let (p, r) = step_model(1e-2);
    let g = FPGrid::symmetric(60.0, 0.05, 1e-3, 10.0);
    let s = solve_fokker_planck(&p, &r, &g).unwrap();
    let dt = g.dt;
    for k in (1000..s.times.len() - 1).step_by(500) {
        let slope = -(s.survival[k + 1] - s.survival[k - 1]) / (2.0 * dt);
        assert!((slope / s.density[k] - 1.0).abs() < 1e-4, "t={}: {slope} vs {}", s.times[k], s.density[k]);
    }
}

#[test]
fn survival_starts_at_one_and_decreases() {
    let (p, r) = step_model(1e-2);
    let s = solve_fokker_planck(&p, &r, &FPGrid::default_for(&p, 20.0)).unwrap();
    let c = survival_from_pde(&s).unwrap();
    assert!((c.at(0.0) - 1.0).abs() < 1e-14);
    assert!(c.survival.windows(2).all(|w| w[1] <= w[0]));
    assert!(s.min_density >= -1e-12);
}

#[test]
fn mass_balance_per_step() {
    let (p, r) = step_model(1e-2);
    let s = solve_fokker_planck(&p, &r, &FPGrid::default_for(&p, 20.0)).unwrap();
    assert!(s.max_mass_residual <= 1e-8, "{:e}", s.max_mass_residual);
    assert!(s.boundary_adequate);
}

#[test]
fn grid_refinement_converges() {
    let (p, r) = step_model(1e-2);
    let n10 = |h: f64, dt: f64| {
        let s = solve_fokker_planck(&p, &r, &FPGrid::symmetric(40.0, h, dt, 10.0)).unwrap();
        *s.survival.last().unwrap()
    };
    let (a, b, c) = (n10(0.2, 4e-2), n10(0.1, 2e-2), n10(0.05, 1e-2));
    let (d1, d2) = ((b - a).abs(), (c - b).abs());
    assert!(d2 <= 4.0 * d1);
    assert!(d1 / d2 > 3.0, "refinement ratio {}", d1 / d2);
}

#[test]
fn narrow_domain_is_flagged() {
    let (p, r) = step_model(1e-2);
    let s = solve_fokker_planck(&p, &r, &FPGrid::symmetric(6.0, 0.05, 1e-2, 10.0)).unwrap();
    assert!(!s.boundary_adequate);
    assert!(s.max_boundary_mass > 1e-8);
}

#[test]
fn snapshots_and_output() {
    let (p, r) = step_model(5e-2);
    let mut g = FPGrid::symmetric(30.0, 0.1, 1e-2, 2.0);
    g.snapshot_times = vec![0.0, 1.0];
    g.record_every = 10;
    let s = solve_fokker_planck(&p, &r, &g).unwrap();
    assert_eq!(s.times.len(), 21);
    assert_eq!(s.snapshots.len(), 2);
    let m: f64 = s.snapshots[1].density.iter().sum::<f64>() * g.spacing();
    assert!((m - s.survival[10]).abs() < 1e-12);
    let prov = kol_core::output::Provenance::for_config(&g).unwrap();
    let csv = s.to_csv(&prov);
    assert_eq!(csv.lines().nth(1), Some("t,N,n"));
    assert_eq!(csv.lines().count(), 2 + 21);
}

#[test]
fn invalid_setups_are_rejected() {
    let (p, r) = step_model(1e-4);
    assert!(matches!(
        solve_fokker_planck(&p, &r, &FPGrid::symmetric(50.0, 0.5, 1.0, 2e9)),
        Err(Error::Config(_))
    ));
    let bad_rate = RateSpec::PiecewiseConstant { level: -1.0 };
    assert!(solve_fokker_planck(&p, &bad_rate, &FPGrid::symmetric(10.0, 0.1, 0.1, 1.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn positive_and_nonincreasing(eps in 0.0f64..0.5, x0 in -2.0f64..2.0, stiff in 0.1f64..10.0) {
        let p = OUParams::new(eps, x0).unwrap();
        let s = solve_fokker_planck(&p, &RateSpec::arctan(stiff), &FPGrid::symmetric(20.0, 0.1, 2e-2, 3.0)).unwrap();
        prop_assert!(s.min_density >= -1e-12);
        prop_assert!(s.survival.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        prop_assert!(s.density.iter().all(|&n| n >= 0.0));
    }
}
