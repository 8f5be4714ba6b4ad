use std::f64::consts::PI;
use std::sync::Arc;

use stable_kernels::kernels::*;
use stable_kernels::quad::{self, QuadOptions};
use stable_kernels::special::{gamma, omega};
use stable_kernels::Error;

fn sigma(s: f64) -> SigmaOrder {
    SigmaOrder::new(s).unwrap()
}

#[test]
fn normalizer_reference_values() {
    assert!((poisson_normalizer(1, sigma(1.0)).unwrap() - PI).abs() < 1e-12);
    assert!((poisson_normalizer(3, sigma(1.0)).unwrap() - PI * PI).abs() < 1e-11);
}

#[test]
fn normalizer_half_order_above_lower_bound() {
    let v = poisson_normalizer(1, sigma(0.5)).unwrap();
    let lower = 2.0 / 0.5 * 2f64.powf(-0.75);
    assert!(v > lower, "{v} <= {lower}");
    // Beta-integral closed form.
    let exact = PI.sqrt() * gamma(0.25) / gamma(0.75);
    assert!((v - exact).abs() < 1e-10 * exact);
}

#[test]
fn normalizer_lower_bound_on_sweep() {
    for n in 1..=3 {
        for k in 1..=19 {
            let s = k as f64 / 10.0;
            let v = poisson_normalizer(n, sigma(s)).unwrap();
            assert!(v >= omega(n) / s * 2f64.powf(-(n as f64 + s) / 2.0));
        }
    }
}

#[test]
fn cauchy_density_values() {
    let one = Scale::new(1.0).unwrap();
    let at0 = poisson_eval(1, sigma(1.0), one, &[0.0]).unwrap();
    assert!((at0 - 1.0 / PI).abs() < 1e-14);
    let a = poisson_eval(1, sigma(1.0), one, &[1.7]).unwrap();
    let b = poisson_eval(1, sigma(1.0), one, &[-1.7]).unwrap();
    assert_eq!(a, b);
    let p = PoissonProfile::new(1, sigma(1.0)).unwrap();
    let tail = outer_mass(&p, 1.0, &QuadOptions::default()).unwrap();
    assert!((tail - 0.5).abs() < 1e-12);
}

#[test]
fn eval_rejects_wrong_dimension() {
    let r = poisson_eval(2, sigma(1.0), Scale::new(1.0).unwrap(), &[0.0]);
    assert!(matches!(r, Err(Error::Dimension(_))));
}

#[test]
fn levy_profile_examples() {
    let o = LevyOptions::default();
    assert!((levy_profile_1d(1.0, 0.0, &o).unwrap() - 1.0 / PI).abs() < 1e-14);
    let g = (-0.25f64).exp() / (2.0 * PI.sqrt());
    assert!((levy_profile_1d(2.0, 1.0, &o).unwrap() - g).abs() < 1e-13);
    assert!((g - 0.21970).abs() < 1e-5);
}

#[test]
fn levy_profile_has_unit_mass() {
    let o = LevyOptions::default();
    let v = |rho: f64| levy_profile_1d(0.7, rho, &o).unwrap();
    let q = QuadOptions::with_tol(1e-11, 1e-10);
    let near = quad::integrate_with_breaks(v, &[0.0, 0.1, 1.0, 10.0, 100.0], &q)
        .unwrap()
        .value;
    let far = quad::integrate_to_infinity(v, 100.0, &q).unwrap().value;
    let mass = 2.0 * (near + far);
    assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
}

#[test]
fn levy_rejects_order_outside_range() {
    assert!(levy_profile_1d(0.01, 1.0, &LevyOptions::default()).is_err());
    assert!(LevyDirect::new(1.99, LevyOptions::default()).is_err());
}

#[test]
fn phi3_at_half_order_matches_brute_force() {
    // (1 / 2 pi^2) int_0^inf t exp(-sqrt t) sin t dt, by 30-digit oscillatory
    // quadrature, cross-checked with a composite Simpson rule on [0, 4000].
    let oracle = 0.289489863876699705536720031374 / (2.0 * PI * PI);
    let v = levy_phi3_scaled(0.5, 1.0, &LevyOptions::default()).unwrap();
    assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
}

#[test]
fn phi3_cauchy_slice_is_three_dimensional_poisson() {
    let o = LevyOptions::default();
    for rho in [0.1f64, 0.5, 1.0, 3.0, 10.0, 100.0] {
        let exact = rho.powi(3) / (PI * PI * (1.0 + rho * rho).powi(2));
        let v = levy_phi3_scaled(1.0, rho, &o).unwrap();
        assert!(
            (v - exact).abs() < 1e-10 * exact.max(1e-3),
            "rho {rho}: {v} vs {exact}"
        );
    }
}

#[test]
fn phi3_vanishes_at_origin() {
    let o = LevyOptions::default();
    let vals: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&r| levy_phi3_scaled(1.9, r, &o).unwrap().abs())
        .collect();
    assert!(vals[0] > vals[1] && vals[1] > vals[2]);
    assert!(vals[2] < 1e-8);
}

#[test]
fn mollify_at_unit_scale_is_identity() {
    let p: SharedProfile = Arc::new(PoissonProfile::new(2, sigma(0.7)).unwrap());
    let m = mollify(p.clone(), 1.0).unwrap();
    for rho in [0.0, 0.3, 2.0, 40.0] {
        assert_eq!(m.eval(rho), p.eval(rho));
    }
}

#[test]
fn mollify_preserves_mass() {
    let opts = QuadOptions::default();
    let profiles: Vec<SharedProfile> = vec![
        Arc::new(PoissonProfile::new(2, sigma(0.7)).unwrap()),
        Arc::new(GaussianProfile::new(3)),
        Arc::new(LevyTable::new(1.3, &LevyOptions::default()).unwrap()),
    ];
    for p in profiles {
        for y in [0.1, 2.0, 10.0] {
            let m = mollify(p.clone(), y).unwrap();
            let mass = radial_mass(&m, &opts).unwrap();
            assert!(
                (mass - 1.0).abs() < 1e-7,
                "{} at y = {y}: {mass}",
                p.label()
            );
        }
    }
}

#[test]
fn mollified_tail_coefficient_scales_with_y_to_sigma() {
    let s = sigma(0.8);
    let p: SharedProfile = Arc::new(PoissonProfile::new(1, s).unwrap());
    let schedule = ProbeSchedule::doubling_to(1e5, 6).unwrap();
    let base = tail_coefficient(&p, s, &schedule).unwrap().value;
    let y = 3.0;
    let scaled = tail_coefficient(&mollify(p, y).unwrap(), s, &schedule)
        .unwrap()
        .value;
    assert!((scaled / base - y.powf(0.8)).abs() < 1e-6);
}

#[test]
fn poisson_tail_coefficient_is_one_over_pi() {
    let p = PoissonProfile::new(1, sigma(1.0)).unwrap();
    let t = tail_coefficient(&p, sigma(1.0), &ProbeSchedule::doubling_to(1e3, 6).unwrap()).unwrap();
    assert!((t.value - 1.0 / PI).abs() < 1e-8);
    assert!(t.residual < 1e-4);
}

#[test]
fn cauchy_levy_tail_coefficient_is_one_over_pi() {
    let p = LevyDirect::new(1.0, LevyOptions::default()).unwrap();
    let t = tail_coefficient(&p, sigma(1.0), &ProbeSchedule::doubling_to(1e3, 6).unwrap()).unwrap();
    assert!((t.value - 1.0 / PI).abs() < 1e-7);
    assert!((t.value - bg_coefficient(sigma(1.0))).abs() < 1e-7);
}

#[test]
fn tail_coefficient_flags_wrong_order() {
    let p = PoissonProfile::new(1, sigma(1.0)).unwrap();
    let r = tail_coefficient(&p, sigma(0.5), &ProbeSchedule::doubling_to(1e3, 6).unwrap());
    assert!(matches!(r, Err(Error::NotStable { .. })), "{r:?}");
}

#[test]
fn bg_coefficient_small_order() {
    // 30-digit evaluation of the closed form at sigma = 1e-4.
    let oracle = 0.0000499971142105532293395658846848;
    let v = bg_coefficient(sigma(1e-4));
    assert!((v - oracle).abs() < 1e-12 * 1e4 * oracle, "{v}");
    assert!((bg_coefficient(sigma(1.0)) - 1.0 / PI).abs() < 1e-15);
}

#[test]
fn levy_table_tracks_direct_quadrature() {
    let o = LevyOptions::default();
    let t = LevyTable::new(0.6, &o).unwrap();
    for rho in [0.0, 0.01, 0.5, 2.0, 7.0, 30.0, 500.0] {
        let d = levy_profile_1d(0.6, rho, &o).unwrap();
        assert!(
            (t.eval(rho) - d).abs() <= 1e-7 * d,
            "rho {rho}: {} vs {d}",
            t.eval(rho)
        );
    }
}
