use std::sync::Arc;

use proptest::prelude::*;
use stable_kernels::concentration::*;
use stable_kernels::experiments::{convolve, ConvolveOptions};
use stable_kernels::harnack::{poisson_harnack_ratio, RadialKernel};
use stable_kernels::hom_space::{normalize, triangle_constant, FiniteHomSpace, SpaceFlags};
use stable_kernels::kernels::*;
use stable_kernels::maximal::*;
use stable_kernels::quad::QuadOptions;
use stable_kernels::special::omega;

fn sigma(s: f64) -> SigmaOrder {
    SigmaOrder::new(s).unwrap()
}

fn line(values: Vec<f64>) -> GridFunction {
    GridFunction::line(-1.0, 0.1, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalizer_above_lower_bound(n in 1usize..=4, s in 0.02f64..1.98) {
        let v = poisson_normalizer(n, sigma(s)).unwrap();
        prop_assert!(v >= omega(n) / s * 2f64.powf(-(n as f64 + s) / 2.0));
    }

    #[test]
    fn poisson_profile_positive_and_decreasing(n in 1usize..=3, s in 0.05f64..1.95, a in 0.0f64..50.0, d in 1e-3f64..10.0) {
        let p = PoissonProfile::new(n, sigma(s)).unwrap();
        prop_assert!(p.eval(a) > 0.0);
        prop_assert!(p.eval(a + d) < p.eval(a));
    }

    #[test]
    fn harnack_ratio_below_limit(n in 1usize..=3, s in 0.05f64..1.95, gamma in 0.05f64..0.9, t in 1e-3f64..1e4) {
        let r = poisson_harnack_ratio(n, sigma(s), gamma, t).unwrap();
        let limit = ((1.0 + gamma) / (1.0 - gamma)).powf(n as f64 + s);
        prop_assert!(r >= 1.0 && r <= limit * (1.0 + 1e-12));
    }

    #[test]
    fn tail_mass_nonincreasing_in_lambda(y in 0.01f64..10.0, s in 0.2f64..1.8, l in 0.01f64..10.0, dl in 0.0f64..10.0) {
        let p: SharedProfile = Arc::new(PoissonProfile::new(1, sigma(s)).unwrap());
        let k = RadialKernel::new(Arc::new(mollify(p, y).unwrap()));
        let o = QuadOptions::default();
        let a = tail_mass(&k, &[0.0], l, &o).unwrap();
        let b = tail_mass(&k, &[0.0], l + dl, &o).unwrap();
        prop_assert!(b <= a + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn theorem34_linear_in_alpha(s in 0.1f64..1.9, gamma in 0.05f64..0.9, alpha in 1e-6f64..1.0, c in 0.1f64..10.0, lambda in 0.1f64..10.0) {
        let b = |a: f64| theorem34_tail_bound(1, sigma(s), gamma, a, lambda).unwrap();
        prop_assert!((b(c * alpha) - c * b(alpha)).abs() <= 1e-12 * b(c * alpha).abs().max(1e-300));
    }

    #[test]
    fn theorem21_dominates_cauchy(y in 1e-6f64..1.0, lambda in 0.1f64..10.0) {
        let exact = 1.0 - 2.0 / std::f64::consts::PI * (lambda / y).atan();
        let b = theorem21_tail_bound(1, lambda, Scale::new(y).unwrap(), sigma(1.0)).unwrap();
        prop_assert!(exact <= b);
    }

    #[test]
    fn hl_maximal_sublinear(f in prop::collection::vec(-5.0f64..5.0, 2..40), c in -3.0f64..3.0) {
        let g: Vec<f64> = f.iter().rev().map(|v| v * 0.5 + 1.0).collect();
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let mf = hl_maximal(&line(f.clone())).unwrap();
        let mg = hl_maximal(&line(g)).unwrap();
        let ms = hl_maximal(&line(sum)).unwrap();
        for (i, v) in f.iter().enumerate() {
            prop_assert!(ms.values()[i] <= mf.values()[i] + mg.values()[i] + 1e-12);
            prop_assert!(mf.values()[i] >= v.abs());
        }
        let scaled = hl_maximal(&line(f.iter().map(|v| c * v).collect())).unwrap();
        for (a, b) in scaled.values().iter().zip(mf.values()) {
            prop_assert!((a - c.abs() * b).abs() <= 1e-12 * (1.0 + b));
        }
    }

    #[test]
    fn convolution_is_linear(f in prop::collection::vec(-2.0f64..2.0, 5..30), a in -2.0f64..2.0, y in 0.05f64..3.0) {
        let g: Vec<f64> = f.iter().map(|v| v.sin()).collect();
        let comb: Vec<f64> = f.iter().zip(&g).map(|(u, v)| a * u + v).collect();
        let p: SharedProfile = Arc::new(PoissonProfile::new(1, sigma(1.0)).unwrap());
        let k = mollify(p, y).unwrap();
        let o = ConvolveOptions::default();
        let kf = convolve(&k, &line(f), &o).unwrap();
        let kg = convolve(&k, &line(g), &o).unwrap();
        let kc = convolve(&k, &line(comb), &o).unwrap();
        for i in 0..kc.len() {
            let lin = a * kf.values()[i] + kg.values()[i];
            prop_assert!((kc.values()[i] - lin).abs() <= 1e-11);
        }
    }

    #[test]
    fn weak_type_sup_bounds_listed_levels(f in prop::collection::vec(0.0f64..3.0, 2..50), l in 0.0f64..3.0) {
        let g = line(f);
        let c = weak_type_curve(&g, &g, &[l]).unwrap();
        prop_assert!(c.values[0] <= c.sup + 1e-12);
    }

    #[test]
    fn domination_constant_monotone(n in 1usize..=3, gamma in 0.05f64..0.9, s in 0.05f64..1.9, ds in 0.01f64..0.5) {
        prop_assert!(domination_constant(n, gamma, s + ds).unwrap() > domination_constant(n, gamma, s).unwrap());
    }

    #[test]
    fn random_spaces_have_triangle_constant_at_least_one(pts in prop::collection::btree_set(-1000i32..1000, 3..12), power in 0.3f64..3.0) {
        let pts: Vec<f64> = pts.into_iter().map(|p| p as f64 / 10.0).collect();
        let m = pts.len();
        let s = FiniteHomSpace::line(pts, vec![1.0; m], power, SpaceFlags::default()).unwrap();
        let t = triangle_constant(&s).unwrap();
        prop_assert!(t >= 1.0);
        if power <= 1.0 {
            prop_assert!(t <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn normalized_distance_is_symmetric_and_dominates_masses(
        pts in prop::collection::btree_set(0i32..500, 3..15),
        w in prop::collection::vec(0.1f64..5.0, 15),
    ) {
        let pts: Vec<f64> = pts.into_iter().map(|p| p as f64).collect();
        let m = pts.len();
        let s = FiniteHomSpace::line(pts, w[..m].to_vec(), 1.0, SpaceFlags::default()).unwrap();
        let n = normalize(&s).unwrap();
        for i in 0..m {
            for j in 0..m {
                prop_assert_eq!(n.dist(i, j), n.dist(j, i));
                if i != j {
                    prop_assert!(n.dist(i, j) >= s.mass(i) + s.mass(j) - 1e-12);
                    prop_assert!(n.dist(i, j) <= s.total_mass() + 1e-12);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn family_maximal_monotone_in_grid(extra_s in 0.1f64..1.9, extra_y in 0.05f64..5.0) {
        let f = GridFunction::sample_line(-3.0, 3.0, 0.05, |x| (1.0 - x.abs()).max(0.0)).unwrap();
        let base = vec![(0.5, 0.3), (1.5, 1.0)];
        let mut more = base.clone();
        more.push((extra_s, extra_y));
        let fam = ProfileFamily::Poisson { n: 1 };
        let o = ConvolveOptions::default();
        let a = family_maximal(&fam, &ParamGrid::new(base).unwrap(), &f, &o).unwrap();
        let b = family_maximal(&fam, &ParamGrid::new(more).unwrap(), &f, &o).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            prop_assert!(v >= u);
        }
    }

    #[test]
    fn convolution_preserves_mass_of_bumps(c in -2.0f64..2.0, y in 0.05f64..0.5) {
        let f = GridFunction::sample_line(-40.0, 40.0, 0.05, |x| (1.0 - (x - c).abs()).max(0.0)).unwrap();
        let p: SharedProfile = Arc::new(GaussianProfile::new(1));
        let g = convolve(&mollify(p, y).unwrap(), &f, &ConvolveOptions::default()).unwrap();
        let mass = |u: &GridFunction| u.values().iter().sum::<f64>() * u.spacing();
        prop_assert!((mass(&g) - mass(&f)).abs() < 1e-9);
    }
}
