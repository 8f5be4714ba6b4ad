//! Dispatch of named experiments: each writes its curves (CSV) and verdicts
//! (JSON) into the output directory and ends with `manifest.json`, which
//! lists every artifact with its SHA-256 and the assertion outcomes.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::config::*;
use super::convolve::{ConvolveOptions, Extension};
use super::homspace::{homspace_suite, HomspaceParams};
use super::identity::{approx_identity_run, IdentityOptions};
use crate::concentration::{
    concentration_curve, selection_admissible, theorem21_tail_bound, theorem23_tail_bound,
    Criterion, KernelFamily, LevySelection, PoissonSelection,
};
use crate::error::{Error, Result};
use crate::harnack::{certify_ball_harnack, poisson_harnack_ratio, BallSampling, RadialKernel};
use crate::kernels::{
    self, bg_coefficient, levy_profile_1d, log_space, mollify, GaussianProfile, LevyOptions,
    PoissonProfile, ProbeSchedule, Scale, SharedProfile, SigmaOrder,
};
use crate::maximal::{
    derivative_tail_constant, domination_constant, family_maximal_many, hl_maximal,
    phi3_bound_scan, weak_type_curve, zo_regularity_integral, ParamGrid, ProfileFamily,
};
use crate::quad::QuadOptions;
use crate::special::{ln_gamma, omega};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pass,
    AssertionFailure,
    ConfigError,
    Refused,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::AssertionFailure => 1,
            Self::ConfigError => 2,
            Self::Refused => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// The manifest written at the end of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: Option<ExperimentName>,
    pub status: RunStatus,
    pub exit_code: i32,
    pub seed: u64,
    pub config: Option<ExperimentConfig>,
    pub assertions: Vec<Assertion>,
    pub artifacts: Vec<Artifact>,
    pub failure: Option<String>,
}

impl RunReport {
    pub fn config_error(message: impl Into<String>) -> Self {
        Self {
            experiment: None,
            status: RunStatus::ConfigError,
            exit_code: RunStatus::ConfigError.exit_code(),
            seed: 0,
            config: None,
            assertions: Vec::new(),
            artifacts: Vec::new(),
            failure: Some(message.into()),
        }
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn write_manifest(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_vec_pretty(self)?)?;
        Ok(path)
    }
}

/// Collects artifacts and assertions for one run.
struct Sink {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
    assertions: Vec<Assertion>,
}

impl Sink {
    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        fs::write(self.dir.join(name), &bytes)?;
        self.artifacts.push(Artifact {
            path: name.into(),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, serde_json::to_vec_pretty(value)?)
    }

    fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<f64>>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.write(name, bytes)
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

fn classify(e: &Error) -> RunStatus {
    match e {
        Error::Config(_) => RunStatus::ConfigError,
        Error::Precondition(_) | Error::InsufficientPadding { .. } | Error::NotStable { .. } => {
            RunStatus::Refused
        }
        _ => RunStatus::AssertionFailure,
    }
}

/// Runs one experiment into `out_dir` and writes the manifest. Never fails:
/// errors are reported through the status and exit code.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> RunReport {
    let mut sink = Sink {
        dir: out_dir.to_path_buf(),
        artifacts: Vec::new(),
        assertions: Vec::new(),
    };
    let outcome = fs::create_dir_all(out_dir)
        .map_err(Error::from)
        .and_then(|_| config.validate())
        .and_then(|_| dispatch(config, &mut sink));
    let (status, failure) = match outcome {
        Ok(()) => match sink.assertions.iter().find(|a| !a.passed) {
            None => (RunStatus::Pass, None),
            Some(a) => (
                RunStatus::AssertionFailure,
                Some(format!("{}: {}", a.name, a.detail)),
            ),
        },
        Err(e) => (classify(&e), Some(e.to_string())),
    };
    let report = RunReport {
        experiment: Some(config.experiment),
        status,
        exit_code: status.exit_code(),
        seed: config.seed,
        config: Some(config.clone()),
        assertions: sink.assertions,
        artifacts: sink.artifacts,
        failure,
    };
    if let Err(e) = report.write_manifest(out_dir) {
        log::error!("cannot write manifest: {e}");
    }
    report
}

fn dispatch(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    log::info!("running {}", cfg.experiment.as_str());
    match cfg.experiment {
        ExperimentName::Normalizers => normalizers(cfg, sink),
        ExperimentName::LevyAccuracy => levy_accuracy(cfg, sink),
        ExperimentName::HarnackSweep => harnack_sweep(cfg, sink),
        ExperimentName::Concentration => concentration(cfg, sink),
        ExperimentName::MaximalDomination => maximal_domination(cfg, sink),
        ExperimentName::ZoCheck => zo_check(cfg, sink),
        ExperimentName::HomspaceSuite => homspace(cfg, sink),
        ExperimentName::ApproxIdentity => approx_identity(cfg, sink),
    }
}

/// `pi^{n/2} Gamma(sigma/2) / Gamma((n + sigma)/2)`.
pub fn poisson_normalizer_closed_form(n: usize, sigma: f64) -> f64 {
    let h = n as f64 / 2.0;
    (h * std::f64::consts::PI.ln() + ln_gamma(sigma / 2.0) - ln_gamma(h + sigma / 2.0)).exp()
}

fn normalizers(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let p: NormalizersParams = cfg.params()?;
    let tol = cfg.tol.unwrap_or(p.tol);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut below = Vec::new();
    for &n in &p.dims {
        for &s in &p.sigmas {
            let quad = kernels::poisson_normalizer(n, SigmaOrder::new(s)?)?;
            let exact = poisson_normalizer_closed_form(n, s);
            let lower = omega(n) / s * 2f64.powf(-(n as f64 + s) / 2.0);
            let rel = (quad - exact).abs() / exact;
            worst = worst.max(rel);
            if quad < lower {
                below.push((n, s));
            }
            rows.push(vec![n as f64, s, quad, exact, lower, rel]);
        }
    }
    sink.csv(
        "normalizers.csv",
        &[
            "n",
            "sigma",
            "quadrature",
            "closed_form",
            "lower_bound",
            "rel_error",
        ],
        rows,
    )?;
    sink.check(
        "closed_form_agreement",
        worst <= tol,
        format!("largest relative error {worst:.3e} (tol {tol:.1e})"),
    );
    let pi = std::f64::consts::PI;
    for (n, target) in [(1, pi), (3, pi * pi)] {
        let v = kernels::poisson_normalizer(n, SigmaOrder::new(1.0)?)?;
        sink.check(
            &format!("reference_n{n}"),
            (v - target).abs() <= tol,
            format!("I = {v:.15} against {target:.15}"),
        );
    }
    sink.check(
        "lower_bound",
        below.is_empty(),
        format!("violations at (n, sigma) = {below:?}"),
    );
    Ok(())
}

fn levy_accuracy(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let p: LevyAccuracyParams = cfg.params()?;
    let tol = cfg.tol.unwrap_or(p.tol);
    let opts = LevyOptions::default();
    let pi = std::f64::consts::PI;
    let mut rows = Vec::new();
    let (mut cauchy, mut gauss) = (0.0f64, 0.0f64);
    let mut rhos = vec![0.0];
    rhos.extend(log_space(1e-3, p.rho_max, p.points - 1));
    for rho in rhos {
        let c = levy_profile_1d(1.0, rho, &opts)?;
        let c_exact = 1.0 / (pi * (1.0 + rho * rho));
        let g = levy_profile_1d(2.0, rho, &opts)?;
        let g_exact = (-rho * rho / 4.0).exp() / (2.0 * pi.sqrt());
        cauchy = cauchy.max((c - c_exact).abs());
        gauss = gauss.max((g - g_exact).abs());
        rows.push(vec![rho, c, c_exact, g, g_exact]);
    }
    sink.csv(
        "levy_profiles.csv",
        &["rho", "sigma1", "cauchy", "sigma2", "gauss"],
        rows,
    )?;
    sink.check(
        "cauchy",
        cauchy <= tol,
        format!("max abs error {cauchy:.3e} (tol {tol:.1e})"),
    );
    sink.check(
        "gauss",
        gauss <= tol,
        format!("max abs error {gauss:.3e} (tol {tol:.1e})"),
    );

    let mut bg = Vec::new();
    for &s in &p.bg_sigmas {
        let sigma = SigmaOrder::new(s)?;
        let profile = kernels::LevyDirect::new(s, opts)?;
        let est = kernels::tail_coefficient(
            &profile,
            sigma,
            &ProbeSchedule::doubling_to(p.bg_radius, 6)?,
        )?;
        let exact = bg_coefficient(sigma);
        let rel = (est.value - exact).abs() / exact;
        sink.check(
            &format!("tail_coefficient_sigma_{s}"),
            rel <= p.bg_tol,
            format!(
                "estimate {:.6e} vs {exact:.6e}, relative {rel:.2e} (tol {})",
                est.value, p.bg_tol
            ),
        );
        bg.push(json!({"sigma": s, "estimate": est, "closed_form": exact, "rel_error": rel}));
    }
    sink.json("tail_coefficients.json", &bg)
}

fn point_kernel(spec: KernelSpec, y: f64) -> Result<(RadialKernel, usize, f64)> {
    let (unit, n, sigma): (SharedProfile, usize, f64) = match spec {
        KernelSpec::Poisson { n, sigma } => (
            Arc::new(PoissonProfile::new(n, SigmaOrder::new(sigma)?)?),
            n,
            sigma,
        ),
        KernelSpec::Gaussian { n } => (Arc::new(GaussianProfile::new(n)), n, 2.0),
    };
    Ok((RadialKernel::new(Arc::new(mollify(unit, y)?)), n, sigma))
}

fn harnack_sweep(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let p: HarnackSweepParams = cfg.params()?;
    let (kernel, n, sigma) = point_kernel(p.kernel, p.y)?;
    let poisson = matches!(p.kernel, KernelSpec::Poisson { .. });
    let predicted = ((1.0 + p.gamma) / (1.0 - p.gamma)).powf(n as f64 + sigma);
    let h = p.h.unwrap_or(if poisson { predicted } else { 1e6 });
    let mut sampling = BallSampling::radial_sweep(n, p.d_min, p.d_max, p.count);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..p.random_poles {
        sampling.poles.push(
            (0..n)
                .map(|_| rng.random_range(-p.pole_spread..=p.pole_spread))
                .collect(),
        );
    }
    let cert = certify_ball_harnack(&kernel, p.gamma, h, &sampling)?;
    sink.json("certificate.json", &cert)?;
    let expect = p.expect.unwrap_or(if poisson {
        Expectation::Pass
    } else {
        Expectation::Refute
    });
    match expect {
        Expectation::Pass => sink.check(
            "certified",
            cert.passed,
            format!("worst ratio {:.6e} against H = {h:.6e}", cert.worst_ratio),
        ),
        Expectation::Refute => sink.check(
            "refuted",
            !cert.passed,
            format!("worst ratio {:.6e} against H = {h:.6e}", cert.worst_ratio),
        ),
    }
    if poisson {
        let s = SigmaOrder::new(sigma)?;
        let ts = log_space(p.d_min / p.y, p.d_max / p.y, p.count);
        let rows = ts
            .iter()
            .map(|&t| Ok(vec![t, poisson_harnack_ratio(n, s, p.gamma, t)?, predicted]))
            .collect::<Result<Vec<_>>>()?;
        sink.csv("poisson_ratio.csv", &["t", "ratio", "bound"], rows)?;
        if p.h.is_none() && p.d_max / p.y >= 1e3 {
            let sharp = cert.worst_ratio / predicted;
            sink.check(
                "bound_attained",
                sharp >= 0.99,
                format!("worst ratio reaches {:.4} of the bound", sharp),
            );
        }
    }
    Ok(())
}

fn concentration(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let p: ConcentrationParams = cfg.params()?;
    let epsilon = cfg.tol.unwrap_or(p.epsilon);
    let schedule = p.schedule();
    let (criterion, n) = match p.kernel {
        ConcentrationKernel::Poisson { n } => (Criterion::Poisson, n),
        ConcentrationKernel::Levy => (Criterion::Levy, 1),
    };
    let adm = selection_admissible(
        &p.selection,
        criterion,
        &schedule,
        p.admissibility_threshold,
    )?;
    sink.json("admissibility.json", &adm)?;
    if !adm.admissible {
        return Err(Error::Precondition(format!(
            "selection {} is inadmissible under the {criterion:?} criterion: terminal value {:.4e} \
             (threshold {}), decreasing over the last decade: {}",
            p.selection.label(),
            adm.terminal,
            adm.threshold,
            adm.decreasing
        )));
    }
    let family: Box<dyn KernelFamily> = match p.kernel {
        ConcentrationKernel::Poisson { n } => Box::new(PoissonSelection {
            n,
            selection: p.selection,
        }),
        ConcentrationKernel::Levy => Box::new(LevySelection {
            selection: p.selection,
            opts: LevyOptions {
                sigma_min: 1e-2,
                ..Default::default()
            },
        }),
    };
    let curve = concentration_curve(
        family.as_ref(),
        p.lambda,
        &schedule,
        &[vec![0.0; n]],
        &QuadOptions::default(),
    )?;
    let mut rows = Vec::new();
    let mut bound_ok = true;
    for (&y, &m) in curve.params.iter().zip(&curve.max_tail_mass) {
        let sigma = p.selection.order(y)?;
        let bound = match p.kernel {
            ConcentrationKernel::Poisson { n } => {
                theorem21_tail_bound(n, p.lambda, Scale::new(y)?, sigma)?
            }
            ConcentrationKernel::Levy => {
                theorem23_tail_bound(p.lambda, Scale::new(y)?, sigma)?.value
            }
        };
        bound_ok &= m <= bound * (1.0 + 1e-9);
        rows.push(vec![y, sigma.get(), m, bound]);
    }
    sink.csv(
        "concentration.csv",
        &["y", "sigma", "max_tail_mass", "bound"],
        rows,
    )?;
    sink.json("curve.json", &curve)?;
    sink.check(
        "decreasing",
        curve.is_strictly_decreasing(),
        format!("tail masses {:?}", curve.max_tail_mass),
    );
    sink.check(
        "terminal_below_epsilon",
        curve.terminal() < epsilon,
        format!(
            "terminal tail mass {:.4e} (epsilon {epsilon})",
            curve.terminal()
        ),
    );
    sink.check(
        "bound_dominates",
        bound_ok,
        "measured tail mass against the closed-form bound column",
    );
    Ok(())
}

fn maximal_domination(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let p: MaximalDominationParams = cfg.params()?;
    let refinement_tol = cfg.tol.unwrap_or(p.refinement_tol);
    let family = ProfileFamily::Poisson { n: 1 };
    let coarse = family.kernels(&ParamGrid::log_spaced(
        p.sigma_range,
        p.y_range,
        p.n_sigma,
        p.n_y,
    )?)?;
    let fine = family.kernels(&ParamGrid::log_spaced(
        p.sigma_range,
        p.y_range,
        2 * p.n_sigma,
        2 * p.n_y,
    )?)?;
    // The sigma_0 = 2 envelope covers every order of the sweep.
    let d = domination_constant(1, p.gamma, 2.0)?;
    let fs = p
        .functions
        .iter()
        .map(|tf| tf.realize(&p.grid))
        .collect::<Result<Vec<_>>>()?;
    let exts: Vec<Extension> = p
        .functions
        .iter()
        .map(|tf| {
            if tf.extends_beyond_support() {
                Extension::Constant
            } else {
                Extension::Zero
            }
        })
        .collect();
    let opts = ConvolveOptions::default();
    let (bigs, bigs_fine) = if fs.iter().all(|f| f.same_grid(&fs[0])) {
        let batch: Vec<_> = fs.iter().zip(&exts).map(|(f, e)| (f, *e)).collect();
        (
            family_maximal_many(&coarse, &batch, &opts)?,
            family_maximal_many(&fine, &batch, &opts)?,
        )
    } else {
        let one = |ks, f, e| family_maximal_many(ks, &[(f, e)], &opts).map(|mut v| v.remove(0));
        let c = fs
            .iter()
            .zip(&exts)
            .map(|(f, e)| one(&coarse, f, *e))
            .collect::<Result<Vec<_>>>()?;
        let r = fs
            .iter()
            .zip(&exts)
            .map(|(f, e)| one(&fine, f, *e))
            .collect::<Result<Vec<_>>>()?;
        (c, r)
    };
    let mut verdicts = Vec::new();
    for (i, tf) in p.functions.iter().enumerate() {
        let (f, big, big_fine) = (&fs[i], &bigs[i], &bigs_fine[i]);
        let m = hl_maximal(f)?;
        let worst = big
            .values()
            .iter()
            .zip(m.values())
            .map(|(a, b)| if *a <= 0.0 { 0.0 } else { a / b })
            .fold(0.0, f64::max);
        let change = big
            .values()
            .iter()
            .zip(big_fine.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / big_fine.sup_norm();
        let sup = big.sup_norm();
        let weak = weak_type_curve(big, f, &log_space(1e-3 * sup, sup, 30))?;
        let rows = (0..f.len()).map(|k| {
            vec![
                f.node(k)[0],
                f.values()[k],
                big.values()[k],
                m.values()[k],
                d * m.values()[k],
            ]
        });
        sink.csv(
            &format!("f{i}_maximal.csv"),
            &["x", "f", "family_maximal", "hl_maximal", "bound"],
            rows,
        )?;
        let mut buf = Vec::new();
        weak.write_csv(&mut buf)?;
        sink.write(&format!("f{i}_weak_type.csv"), buf)?;
        let label = tf.label();
        sink.check(
            &format!("{label}: dominated"),
            worst <= d,
            format!("max family/HL ratio {worst:.4} against D = {d:.4}"),
        );
        sink.check(
            &format!("{label}: refinement"),
            change <= refinement_tol,
            format!("relative change {change:.3e} on doubling the grid (tol {refinement_tol})"),
        );
        sink.check(
            &format!("{label}: weak type"),
            weak.constant() <= 2.0 * d,
            format!("weak (1,1) ratio {:.4}", weak.constant()),
        );
        verdicts.push(json!({
            "function": label,
            "max_ratio": worst,
            "refinement_change": change,
            "weak_type_constant": weak.constant(),
        }));
    }
    sink.json(
        "verdict.json",
        &json!({"domination_constant": d, "functions": verdicts}),
    )
}

fn zo_check(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let p: ZoCheckParams = cfg.params()?;
    let band = cfg.tol.unwrap_or(p.band);
    let grid = ParamGrid::log_spaced(p.sigma_range, p.y_range, p.n_sigma, p.n_y)?;
    let family = ProfileFamily::Levy;
    let units = family.profiles(&grid.sigmas())?;
    let rhos = log_space(1e-2, 1e6, 400);
    let c = units
        .iter()
        .map(|(_, u)| derivative_tail_constant(u.as_ref(), &rhos))
        .fold(0.0, f64::max);
    let kernels: Vec<SharedProfile> = family.kernels(&grid)?.into_iter().map(|(_, k)| k).collect();
    let opts = QuadOptions::with_tol(1e-10, 1e-8);
    let values =
        p.z.iter()
            .map(|&z| zo_regularity_integral(&kernels, z, p.x_extent, c, &opts))
            .collect::<Result<Vec<_>>>()?;
    let mut totals: Vec<f64> = values.iter().map(|v| v.total).collect();
    sink.csv(
        "zo_integral.csv",
        &["z", "inner", "tail", "total"],
        values.iter().map(|v| vec![v.z, v.inner, v.tail, v.total]),
    )?;
    totals.sort_by(f64::total_cmp);
    let median = totals[totals.len() / 2];
    let spread = totals
        .iter()
        .map(|t| (t - median).abs() / median)
        .fold(0.0, f64::max);
    sink.check(
        "uniform_in_z",
        spread <= band,
        format!("largest deviation from the median {median:.5} is {spread:.3e} (band {band})"),
    );
    let scan = phi3_bound_scan(&p.phi3_sigmas, &p.phi3_rhos, &LevyOptions::default())?;
    sink.csv(
        "phi3.csv",
        &["sigma", "rho", "rho3_phi3", "rho2_derivative"],
        scan.rows
            .iter()
            .map(|r| vec![r.sigma, r.rho, r.phi3_scaled, r.derivative_scaled]),
    )?;
    sink.check(
        "phi3_no_growth",
        scan.no_growth,
        "rho^3 |Phi^3| over the last decade of the scan",
    );
    sink.check(
        "phi3_bounded",
        scan.max_phi3.is_finite(),
        format!("max rho^3 |Phi^3| = {:.6}", scan.max_phi3),
    );
    sink.json(
        "verdict.json",
        &json!({
            "tail_constant": c,
            "median": median,
            "spread": spread,
            "max_phi3": scan.max_phi3,
            "max_derivative": scan.max_derivative,
            "relation_defect": scan.relation_defect,
        }),
    )
}

fn homspace(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let p: HomspaceParams = cfg.params()?;
    let r = homspace_suite(&p)?;
    sink.json("homspace_report.json", &r)?;
    sink.check(
        "reference_constants",
        r.predicted_reference_exact,
        format!("{:?}", r.predicted_reference),
    );
    for case in &r.normality {
        sink.check(
            &format!("{}: normality", case.space),
            case.report.passed,
            format!(
                "measured [{:.4}, {:.4}] in [{:.4}, {:.4}]",
                case.report.measured_min, case.report.measured_max, case.report.c1, case.report.c2
            ),
        );
        let ann = case.report.annulus_lemma;
        sink.check(
            &format!("{}: annulus lower bound", case.space),
            ann.is_some_and(|a| a.passed),
            format!("{ann:?}"),
        );
    }
    sink.check(
        "gapped_union_index",
        r.gapped_brackets_three,
        format!(
            "index {:?}, bracket low {:?}",
            r.gapped_union.index, r.gapped_union.bracket_low
        ),
    );
    sink.check(
        "dyadic_union_empty_annuli",
        r.dyadic_large_n_empty,
        format!("{:?}", r.dyadic.last()),
    );
    for k in &r.kernels {
        sink.check(
            &format!("scale {:.3e}: ball harnack", k.scale),
            k.ball.passed,
            format!(
                "worst {:.4} against H = {:.4}",
                k.ball.worst_ratio, k.ball.h
            ),
        );
        sink.check(
            &format!("scale {:.3e}: regularization sandwich", k.scale),
            k.sandwich_passed,
            format!("{:?}", k.sandwich),
        );
    }
    sink.check(
        "space_maximal",
        r.maximal.passed && r.maximal.atom_passed,
        format!("{:?}", r.maximal),
    );
    sink.check(
        "general_concentration",
        r.passed,
        format!("ratio {:.4e}", r.concentration_ratio),
    );
    Ok(())
}

fn approx_identity(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let p: ApproxIdentityParams = cfg.params()?;
    let opts = IdentityOptions {
        tol: cfg.tol.unwrap_or(p.tol),
        admissibility_threshold: p.admissibility_threshold,
        convolve: ConvolveOptions::default(),
    };
    let curve = approx_identity_run(&p.family, &p.function, &p.grid, &p.schedule(), &opts)?;
    sink.csv(
        "error_curve.csv",
        &["param", "sigma", "y", "sup_error", "l1_error"],
        curve
            .points
            .iter()
            .map(|q| vec![q.param, q.sigma, q.y, q.sup_error, q.l1_error]),
    )?;
    sink.json("curve.json", &curve)?;
    let errors = curve.errors();
    match p.expectation() {
        IdentityExpectation::Converge => sink.check(
            "converged",
            curve.converged,
            format!(
                "terminal {:?} error {:.4e} (tol {}), decreasing over the last decade: {}",
                curve.mode, curve.terminal, curve.tol, curve.decreasing
            ),
        ),
        IdentityExpectation::Dissipate => {
            let sup = p.function.realize(&p.grid)?.sup_norm();
            let first = errors[0];
            sink.check(
                "dissipated",
                curve.terminal > first && curve.terminal >= 0.5 * sup,
                format!(
                    "error grows from {first:.4} to {:.4} against sup f = {sup:.4}",
                    curve.terminal
                ),
            );
        }
    }
    Ok(())
}
