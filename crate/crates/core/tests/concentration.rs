use std::f64::consts::PI;
use std::sync::Arc;

use stable_kernels::concentration::*;
use stable_kernels::harnack::{FnKernel, PointKernel, RadialKernel};
use stable_kernels::kernels::*;
use stable_kernels::quad::QuadOptions;

fn sigma(s: f64) -> SigmaOrder {
    SigmaOrder::new(s).unwrap()
}

fn cauchy(y: f64) -> RadialKernel {
    let p: SharedProfile = Arc::new(PoissonProfile::new(1, sigma(1.0)).unwrap());
    RadialKernel::new(Arc::new(mollify(p, y).unwrap()))
}

fn half_decades(to: u32) -> Vec<f64> {
    (2..=2 * to)
        .map(|k| 10f64.powf(-(k as f64) / 2.0))
        .collect()
}

#[test]
fn cauchy_tail_masses() {
    let o = QuadOptions::default();
    assert!((tail_mass(&cauchy(1.0), &[0.0], 1.0, &o).unwrap() - 0.5).abs() < 1e-12);
    let exact = 1.0 - 2.0 / PI * 100f64.atan();
    let v = tail_mass(&cauchy(0.01), &[0.0], 1.0, &o).unwrap();
    assert!((v - exact).abs() < 1e-12);
    assert!((v - 0.00637).abs() < 1e-5);
}

#[test]
fn tail_mass_tends_to_one_as_lambda_shrinks() {
    let o = QuadOptions::default();
    let g = RadialKernel::new(Arc::new(GaussianProfile::new(2)));
    for k in [&cauchy(1.0) as &dyn PointKernel, &g] {
        let v = tail_mass(k, &vec![0.0; k.dim()], 1e-9, &o).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }
}

#[test]
fn non_radial_tail_mass_by_quadrature() {
    let y = 0.3;
    let k = FnKernel::new(1, "shifted cauchy", move |x: &[f64], z: &[f64]| {
        y / (PI * (y * y + (x[0] - z[0]).powi(2)))
    });
    let v = tail_mass(&k, &[2.0], 1.5, &QuadOptions::default()).unwrap();
    let exact = 1.0 - 2.0 / PI * (1.5f64 / y).atan();
    assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
}

#[test]
fn admissibility_examples() {
    let sched = half_decades(10);
    let log_half = SelectionFunction::LogPower { alpha: 0.5 };
    assert!(
        selection_admissible(&log_half, Criterion::Poisson, &sched, 0.1)
            .unwrap()
            .admissible
    );
    let power = SelectionFunction::Power { epsilon: 0.25 };
    assert!(
        selection_admissible(&power, Criterion::Levy, &sched, 0.1)
            .unwrap()
            .admissible
    );
    let log_one = SelectionFunction::LogPower { alpha: 1.0 };
    let r = selection_admissible(&log_one, Criterion::Poisson, &sched, 0.1).unwrap();
    assert!(!r.admissible);
    for s in &r.samples {
        assert!((s.functional - (-1f64).exp()).abs() < 1e-12);
    }
}

#[test]
fn theorem21_examples() {
    let b = theorem21_tail_bound(1, 1.0, Scale::new(0.1).unwrap(), sigma(0.5)).unwrap();
    assert!((b - 0.5318).abs() < 1e-4);
    let small = theorem21_tail_bound(1, 1.0, Scale::new(1e-12).unwrap(), sigma(0.5)).unwrap();
    assert!(small < 1e-5);
}

#[test]
fn theorem21_dominates_poisson_tails() {
    let o = QuadOptions::default();
    for n in [1, 2] {
        for &y in &[1e-1, 1e-3, 1e-6] {
            for &s in &[0.2, 0.8, 1.5] {
                let p: SharedProfile = Arc::new(PoissonProfile::new(n, sigma(s)).unwrap());
                let k = RadialKernel::new(Arc::new(mollify(p, y).unwrap()));
                let m = tail_mass(&k, &vec![0.0; n], 1.0, &o).unwrap();
                let b = theorem21_tail_bound(n, 1.0, Scale::new(y).unwrap(), sigma(s)).unwrap();
                assert!(m <= b, "n {n}, y {y}, sigma {s}: {m} > {b}");
            }
        }
    }
}

#[test]
fn theorem23_examples() {
    let b = theorem23_tail_bound(1.0, Scale::new(0.01).unwrap(), sigma(0.1)).unwrap();
    let exact = 4.0 * PI * PI * 0.1 * 0.01f64.powf(0.1) / 0.1;
    assert!((b.value - exact).abs() < 1e-12 * exact);
    assert!((b.value - 24.9).abs() < 0.05);
    assert!(b.note.is_none());
    let power = SelectionFunction::Power { epsilon: 0.25 };
    let vals: Vec<f64> = [1e-4, 1e-8, 1e-16, 1e-24]
        .iter()
        .map(|&y| {
            theorem23_tail_bound(1.0, Scale::new(y).unwrap(), power.order(y).unwrap())
                .unwrap()
                .value
        })
        .collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(vals[3] < 1e-4, "{vals:?}");
}

#[test]
fn theorem34_examples() {
    let b = |a: f64| theorem34_tail_bound(1, sigma(1.0), 1.0 / 3.0, a, 1.0).unwrap();
    assert!((b(0.01) - 0.20).abs() < 1e-14);
    for a in [1e-4, 0.01, 0.3] {
        assert!((b(2.0 * a) - 2.0 * b(a)).abs() < 1e-13 * b(a));
    }
}

#[test]
fn theorem34_dominates_synthetic_poisson_family() {
    let s = sigma(1.0);
    for &alpha in &[1e-4, 1e-3, 1e-2, 0.1] {
        let y = poisson_scale_for_alpha(1, s, alpha).unwrap();
        assert!((y - alpha * PI).abs() < 1e-14);
        for &lambda in &[0.5, 1.0, 4.0] {
            let measured = 1.0 - 2.0 / PI * (lambda / y).atan();
            let b = theorem34_tail_bound(1, s, 1.0 / 3.0, alpha, lambda).unwrap();
            assert!(measured <= b, "alpha {alpha}, lambda {lambda}");
        }
    }
}

#[test]
fn poisson_selection_concentrates() {
    let fam = PoissonSelection {
        n: 1,
        selection: SelectionFunction::LogPower { alpha: 0.5 },
    };
    let sched = half_decades(10);
    let c = concentration_curve(&fam, 1.0, &sched, &[vec![0.0]], &QuadOptions::default()).unwrap();
    assert!(c.is_strictly_decreasing());
    assert!(c.terminal() < 0.01, "{}", c.terminal());
    // y^Sigma(y) decays slowly: at y = 1e-6 the mass is still above 0.01.
    let at_1e6 = c
        .params
        .iter()
        .position(|&y| (y - 1e-6).abs() < 1e-18)
        .unwrap();
    assert!(c.max_tail_mass[at_1e6] > 0.01);
}

#[test]
fn fixed_scale_sigma_sweep_dissipates() {
    let fam = PoissonSigmaSweep { n: 1, y: 1.0 };
    let sched = [1.5, 1.0, 0.5, 0.1, 0.03, 0.01];
    let c = concentration_curve(&fam, 1.0, &sched, &[vec![0.0]], &QuadOptions::default()).unwrap();
    assert!(c.max_tail_mass.windows(2).all(|w| w[1] > w[0]));
    assert!(c.terminal() > 0.98);
}

#[test]
fn constant_family_gives_constant_curve() {
    let fam = ConstantFamily {
        kernel: Arc::new(cauchy(0.5)),
        translation_invariant: false,
    };
    let c = concentration_curve(
        &fam,
        1.0,
        &[1.0, 0.5, 0.1],
        &[vec![0.0], vec![3.0]],
        &QuadOptions::default(),
    )
    .unwrap();
    assert!(c
        .max_tail_mass
        .iter()
        .all(|&m| (m - c.max_tail_mass[0]).abs() < 1e-14));
    assert!(!c.is_strictly_decreasing());
}

#[test]
fn curve_rejects_increasing_schedule() {
    let fam = PoissonSigmaSweep { n: 1, y: 1.0 };
    assert!(concentration_curve(
        &fam,
        1.0,
        &[0.1, 0.5],
        &[vec![0.0]],
        &QuadOptions::default()
    )
    .is_err());
}
