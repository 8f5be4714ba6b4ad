use std::f64::consts::PI;
use std::sync::Arc;

use serde_json::json;
use stable_kernels::concentration::SelectionFunction;
use stable_kernels::experiments::config::half_decades;
use stable_kernels::experiments::*;
use stable_kernels::kernels::*;
use stable_kernels::maximal::GridFunction;
use stable_kernels::Error;

fn cauchy(y: f64) -> SharedProfile {
    let p: SharedProfile = Arc::new(PoissonProfile::new(1, SigmaOrder::new(1.0).unwrap()).unwrap());
    Arc::new(mollify(p, y).unwrap())
}

#[test]
fn convolving_one_with_constant_extension_gives_one() {
    let f = GridFunction::sample_line(-1.0, 1.0, 0.05, |_| 1.0).unwrap();
    let opts = ConvolveOptions {
        extension: Extension::Constant,
        ..Default::default()
    };
    for k in [cauchy(0.3), cauchy(20.0)] {
        let g = convolve(k.as_ref(), &f, &opts).unwrap();
        assert!(g.values().iter().all(|v| (v - 1.0).abs() < 1e-10));
    }
}

#[test]
fn cauchy_against_hat_matches_closed_form() {
    // Second antiderivative of 1 / (pi (1 + u^2)).
    let big_f = |u: f64| (u * u.atan() - 0.5 * (1.0 + u * u).ln()) / PI;
    let f = GridFunction::sample_line(-5.0, 5.0, 0.05, |x| (1.0 - x.abs()).max(0.0)).unwrap();
    let g = convolve(cauchy(1.0).as_ref(), &f, &ConvolveOptions::default()).unwrap();
    for (x, v) in g.nodes().zip(g.values()) {
        let x = x[0];
        let exact = big_f(x + 1.0) - 2.0 * big_f(x) + big_f(x - 1.0);
        assert!((v - exact).abs() < 1e-10, "x {x}: {v} vs {exact}");
    }
}

#[test]
fn convolution_commutes_with_translation() {
    let h = 0.02;
    let bump = |c: f64| move |x: f64| (-(x - c) * (x - c) * 4.0).exp();
    let f = GridFunction::sample_line(-6.0, 6.0, h, bump(0.0)).unwrap();
    let g = GridFunction::sample_line(-6.0, 6.0, h, bump(10.0 * h)).unwrap();
    let k = cauchy(0.5);
    let kf = convolve(k.as_ref(), &f, &ConvolveOptions::default()).unwrap();
    let kg = convolve(k.as_ref(), &g, &ConvolveOptions::default()).unwrap();
    // Interior nodes only: the zero extension is not translation invariant.
    for i in 200..400 {
        assert!((kg.values()[i + 10] - kf.values()[i]).abs() < 1e-12);
    }
}

#[test]
fn convolution_preserves_mass() {
    let f = GridFunction::sample_line(-20.0, 20.0, 0.02, |x| (1.0 - x.abs()).max(0.0)).unwrap();
    let p: SharedProfile = Arc::new(GaussianProfile::new(1));
    let g = convolve(&mollify(p, 0.3).unwrap(), &f, &ConvolveOptions::default()).unwrap();
    let mass = |u: &GridFunction| u.values().iter().sum::<f64>() * u.spacing();
    assert!((mass(&g) - mass(&f)).abs() < 1e-10);
}

#[test]
fn truncated_extension_refuses_short_grid() {
    let f = GridFunction::sample_line(-4.0, 4.0, 0.05, |_| 1.0).unwrap();
    let opts = ConvolveOptions {
        extension: Extension::Truncated { tol: 1e-6 },
        ..Default::default()
    };
    let r = convolve(cauchy(1.0).as_ref(), &f, &opts);
    match r {
        Err(Error::InsufficientPadding {
            required_padding, ..
        }) => assert!(required_padding > 4.0),
        other => panic!("expected a padding refusal, got {other:?}"),
    }
    // A narrow Gaussian is fine once outputs keep away from the edges.
    let p: SharedProfile = Arc::new(GaussianProfile::new(1));
    let inner = ConvolveOptions {
        window: Some((-3.5, 3.5)),
        ..opts
    };
    let g = convolve(&mollify(p, 0.01).unwrap(), &f, &inner).unwrap();
    assert!(g.values().iter().all(|v| (v - 1.0).abs() < 1e-6));
}

#[test]
fn plan_reuse_matches_direct_convolution() {
    let f = GridFunction::sample_line(-3.0, 3.0, 0.05, |x| x.sin()).unwrap();
    let g = GridFunction::sample_line(-3.0, 3.0, 0.05, |x| (x * x).min(1.0)).unwrap();
    let k = cauchy(0.7);
    let opts = ConvolveOptions::default();
    let plan = ConvolutionPlan::new(k.as_ref(), &f, &opts).unwrap();
    assert_eq!(
        plan.apply(&f, Extension::Zero).unwrap(),
        convolve(k.as_ref(), &f, &opts).unwrap()
    );
    assert_eq!(
        plan.apply(&g, Extension::Zero).unwrap(),
        convolve(k.as_ref(), &g, &opts).unwrap()
    );
    let other = GridFunction::sample_line(-3.0, 3.1, 0.05, |x| x).unwrap();
    assert!(plan.apply(&other, Extension::Zero).is_err());
}

#[test]
fn poisson_selection_approximates_identity() {
    let family = IdentityFamily::Poisson {
        selection: SelectionFunction::LogPower { alpha: 0.5 },
    };
    let curve = approx_identity_run(
        &family,
        &TestFunction::default(),
        &GridSpec::default(),
        &half_decades(10),
        &IdentityOptions::default(),
    )
    .unwrap();
    assert_eq!(curve.mode, ErrorMode::SupNode);
    assert!(curve.converged, "{:?}", curve.errors());
}

#[test]
fn fixed_scale_sigma_sweep_dissipates() {
    let family = IdentityFamily::PoissonFixedScale { y: 1.0 };
    let sched = [1.9, 1.0, 0.5, 0.1, 0.02];
    let curve = approx_identity_run(
        &family,
        &TestFunction::default(),
        &GridSpec::default(),
        &sched,
        &IdentityOptions::default(),
    )
    .unwrap();
    let e = curve.errors();
    assert!(!curve.converged);
    assert!(e[4] > e[0] && e[4] >= 0.5, "{e:?}");
}

#[test]
fn inadmissible_selection_is_refused() {
    let family = IdentityFamily::Poisson {
        selection: SelectionFunction::LogPower { alpha: 1.0 },
    };
    let r = approx_identity_run(
        &family,
        &TestFunction::default(),
        &GridSpec::default(),
        &half_decades(10),
        &IdentityOptions::default(),
    );
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn discontinuous_functions_use_grid_l1() {
    let family = IdentityFamily::Poisson {
        selection: SelectionFunction::LogPower { alpha: 0.5 },
    };
    let curve = approx_identity_run(
        &family,
        &TestFunction::Indicator { a: -1.0, b: 1.0 },
        &GridSpec::default(),
        &half_decades(10),
        &IdentityOptions::default(),
    )
    .unwrap();
    assert_eq!(curve.mode, ErrorMode::L1Grid);
    assert!(curve.decreasing);
}

fn config(value: serde_json::Value) -> ExperimentConfig {
    ExperimentConfig::from_json(&value.to_string()).unwrap()
}

fn read_manifest(dir: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn harnack_run_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(
        &ExperimentConfig::new(ExperimentName::HarnackSweep),
        dir.path(),
    );
    assert_eq!(report.status, RunStatus::Pass, "{:?}", report.failure);
    assert_eq!(report.exit_code, 0);
    assert!(dir.path().join("certificate.json").exists());
    let m = read_manifest(dir.path());
    assert_eq!(m["exit_code"], 0);
    assert!(!m["artifacts"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_configs_are_config_errors() {
    let bad = json!({"experiment": "harnack-sweep", "bogus": 1}).to_string();
    assert!(matches!(
        ExperimentConfig::from_json(&bad),
        Err(Error::Config(_))
    ));
    let bad = json!({"experiment": "no-such-experiment"}).to_string();
    assert!(matches!(
        ExperimentConfig::from_json(&bad),
        Err(Error::Config(_))
    ));
    let bad = json!({"experiment": "harnack-sweep", "params": {"gamma": 2.0}}).to_string();
    assert!(matches!(
        ExperimentConfig::from_json(&bad),
        Err(Error::Config(_))
    ));

    // Unknown params caught at run time still yield exit code 2.
    let mut cfg = ExperimentConfig::new(ExperimentName::Normalizers);
    cfg.params = json!({"dims": [1], "extra": true});
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&cfg, dir.path());
    assert_eq!(report.status, RunStatus::ConfigError);
    assert_eq!(report.exit_code, 2);
    assert_eq!(read_manifest(dir.path())["exit_code"], 2);
}

#[test]
fn inadmissible_concentration_run_is_refused() {
    let cfg = config(json!({
        "experiment": "concentration",
        "params": {"selection": {"kind": "log_power", "alpha": 1.0}}
    }));
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&cfg, dir.path());
    assert_eq!(report.status, RunStatus::Refused);
    assert_eq!(report.exit_code, 3);
    assert!(dir.path().join("admissibility.json").exists());
}

#[test]
fn refuted_expectation_passes_for_gaussian() {
    let cfg = config(json!({
        "experiment": "harnack-sweep",
        "params": {"kernel": {"kind": "gaussian", "n": 1}, "h": 1000.0, "d_min": 1.0, "d_max": 50.0, "expect": "refute"}
    }));
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&cfg, dir.path());
    assert_eq!(report.status, RunStatus::Pass, "{:?}", report.failure);
}

#[test]
fn runs_are_deterministic_for_a_seed() {
    let cfg = config(json!({
        "experiment": "harnack-sweep",
        "seed": 11,
        "params": {"random_poles": 4}
    }));
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_experiment(&cfg, a.path());
    let rb = run_experiment(&cfg, b.path());
    let hashes = |r: &RunReport| {
        r.artifacts
            .iter()
            .map(|x| x.sha256.clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(hashes(&ra), hashes(&rb));
    assert!(!hashes(&ra).is_empty());
}

#[test]
fn experiment_names_round_trip() {
    for name in ExperimentName::ALL {
        let cfg = config(json!({"experiment": name.as_str()}));
        assert_eq!(cfg.experiment, name);
        assert_eq!(cfg.seed, 0);
    }
    assert_eq!(RunStatus::Pass.exit_code(), 0);
    assert_eq!(RunStatus::AssertionFailure.exit_code(), 1);
    assert_eq!(RunStatus::ConfigError.exit_code(), 2);
    assert_eq!(RunStatus::Refused.exit_code(), 3);
}

#[test]
fn example_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
