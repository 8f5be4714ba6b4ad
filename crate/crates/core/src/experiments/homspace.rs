//! The finite homogeneous-space suite: normalization, annulus classes,
//! Harnack-certified kernel families, their regularizations, maximal
//! domination and concentration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harnack::{self, HarnackCertificate};
use crate::hom_space::{
    self, AnnulusIndexReport, FiniteHomSpace, GeneralConcentrationReport,
    GeneralConcentrationSetup, GeometryConstants, KernelMatrix, NormalConstants, NormalityReport,
    SpaceMaximalReport,
};
use crate::kernels::log_space;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomspaceParams {
    pub interval_cells: usize,
    pub half_line_length: f64,
    pub half_line_cells: usize,
    pub gapped_k_max: usize,
    pub gapped_per_unit: usize,
    pub gap_nus: Vec<f64>,
    pub dyadic_n_max: u32,
    pub dyadic_per_interval: usize,
    /// Factor applied to measured geometric constants before use.
    pub safety: f64,
    pub epsilon: f64,
    /// Ball ratio for the maximal check; must satisfy `gamma tau < 1`.
    pub maximal_gamma: f64,
    /// Decay exponent `s` of the kernel family `phi_t(delta) = (s/2) t^s (t + delta)^{-1-s}`.
    pub s: f64,
    /// Family scales `t`, decreasing.
    pub scales: Vec<f64>,
    /// Tail radius, in units of total mass.
    pub lambda: f64,
    /// Stability radius, in units of total mass.
    pub stability_radius: f64,
}

impl Default for HomspaceParams {
    fn default() -> Self {
        Self {
            interval_cells: 200,
            half_line_length: 4.0,
            half_line_cells: 600,
            gapped_k_max: 4,
            gapped_per_unit: 20,
            gap_nus: vec![
                1.5, 2.0, 2.5, 2.8, 2.9, 2.95, 3.0, 3.05, 3.1, 3.2, 3.5, 4.0, 5.0,
            ],
            dyadic_n_max: 9,
            dyadic_per_interval: 9,
            safety: 1.1,
            epsilon: 0.1,
            maximal_gamma: 0.25,
            s: 1.0,
            scales: log_space(0.05, 1e-4, 8),
            lambda: 0.1,
            stability_radius: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityCase {
    pub space: String,
    pub geometry: GeometryConstants,
    pub predicted: NormalConstants,
    pub report: NormalityReport,
    /// Measured `(min, max)` of `mu(B_delta(x, r)) / r`, deflated and inflated
    /// by the safety factor; used as `(c1, c2)` by the theorem checks.
    pub measured_c1: f64,
    pub measured_c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicEmptiness {
    pub n: u32,
    pub nu: f64,
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelChecks {
    pub scale: f64,
    pub alpha: f64,
    pub ball: HarnackCertificate,
    /// `(max K / K~, max K~ / K)`.
    pub sandwich: (f64, f64),
    pub sandwich_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomspaceSuiteReport {
    pub predicted_reference: NormalConstants,
    pub predicted_reference_exact: bool,
    pub normality: Vec<NormalityCase>,
    pub gapped_union: AnnulusIndexReport,
    pub gapped_brackets_three: bool,
    pub dyadic: Vec<DyadicEmptiness>,
    pub dyadic_large_n_empty: bool,
    pub ball_h: f64,
    pub kernels: Vec<KernelChecks>,
    pub maximal: SpaceMaximalReport,
    pub concentration: GeneralConcentrationReport,
    pub concentration_ratio: f64,
    pub passed: bool,
}

/// Geometry and normality of one space.
fn normality_case(
    name: &str,
    space: &FiniteHomSpace,
    p: &HomspaceParams,
) -> Result<(NormalityCase, FiniteHomSpace)> {
    let total = space.total_mass();
    let span = {
        let pos = space.positions();
        pos.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - pos.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let stride = (space.len() / 40).max(1);
    let radii = log_space(span / space.len() as f64 * 2.0, span / 2.0, 12);
    let tau = hom_space::triangle_constant(space)?;
    let a = hom_space::doubling_constant(space, &hom_space::grid_probes(space, stride, &radii))?;
    let geometry = GeometryConstants::inflated(tau, a, p.safety);
    let predicted = hom_space::predicted_normal_constants(geometry.tau, geometry.a)?;
    let normalized = hom_space::normalize(space)?;
    let atom = space.masses().iter().cloned().fold(0.0, f64::max);
    let probes =
        hom_space::grid_probes(&normalized, stride, &log_space(4.0 * atom, total / 2.0, 16));
    // The annulus bound leans on normality at the outer radius
    // (1 + eps) c2 r / c1, which a bounded sample only has up to mu(X) / c1.
    let mut masses = space.masses().to_vec();
    masses.sort_by(f64::total_cmp);
    let typical = masses[masses.len() / 2];
    let annulus_top = total / ((1.0 + p.epsilon) * predicted.c2);
    if annulus_top <= 2.0 * typical {
        return Err(Error::Precondition(format!(
            "{name}: cells too coarse for the annulus bound (typical cell mass {typical:.3e}, \
             largest admissible radius {annulus_top:.3e})"
        )));
    }
    let annulus = hom_space::grid_probes(
        &normalized,
        stride,
        &log_space(2.0 * typical, annulus_top, 8),
    );
    let report = hom_space::normality_check(
        &normalized,
        predicted.c1,
        predicted.c2,
        &probes,
        p.epsilon,
        &annulus,
    );
    let case = NormalityCase {
        space: name.into(),
        geometry,
        predicted,
        measured_c1: report.measured_min / p.safety,
        measured_c2: report.measured_max * p.safety,
        report,
    };
    Ok((case, normalized))
}

/// `phi_t(delta) = (s/2) t^s (t + delta)^{-1-s}`, which has unit mass when
/// balls grow like `2 r` and satisfies `phi_t <= alpha delta^{-1-s}` with
/// `alpha = s t^s / 2`.
fn family_kernel(normalized: &FiniteHomSpace, s: f64, t: f64) -> (f64, KernelMatrix) {
    let alpha = 0.5 * s * t.powf(s);
    let k = hom_space::radial_markov_kernel(normalized, move |d| alpha * (t + d).powf(-1.0 - s));
    (alpha, k)
}

pub fn homspace_suite(p: &HomspaceParams) -> Result<HomspaceSuiteReport> {
    if p.scales.windows(2).any(|w| w[1] >= w[0]) || p.scales.is_empty() {
        return Err(Error::Config("homspace scales must decrease".into()));
    }
    let reference = hom_space::predicted_normal_constants(1.0, 2.0)?;
    let reference_exact = reference.tau_tilde == 6.0 && reference.c1 == 0.5 && reference.c2 == 10.0;

    let line = FiniteHomSpace::uniform_interval(0.0, 1.0, p.interval_cells)?;
    let half = FiniteHomSpace::sqrt_weighted_half_line(p.half_line_length, p.half_line_cells)?;
    let (line_case, normalized) = normality_case("uniform interval", &line, p)?;
    let (half_case, _) = normality_case("x^(-1/2) half-line", &half, p)?;

    // Annulus class of the gapped union, probed at every realized distance
    // from the central interval.
    let gapped = FiniteHomSpace::gapped_union(p.gapped_k_max, p.gapped_per_unit)?;
    let pos = gapped.positions();
    let centre: Vec<usize> = (0..gapped.len()).filter(|&i| pos[i].abs() < 0.5).collect();
    let gap_probes = hom_space::gap_probes(&gapped, &centre, 1e-3, 2.0);
    let gapped_union = hom_space::annulus_index(&gapped, &p.gap_nus, &gap_probes)?;
    let gapped_brackets_three = matches!(
        (gapped_union.bracket_low, gapped_union.index),
        (Some(lo), Some(hi)) if lo < 3.0 && hi >= 3.0 && hi - lo <= 0.2
    );

    // Empty annuli A(2^n, 2, 2 nu) on the dyadic union, at the ratio
    // nu = (1 + eps) c2 / c1 of the normal-space annulus lemma.
    let dy = FiniteHomSpace::dyadic_union(p.dyadic_n_max, p.dyadic_per_interval)?;
    let nu = (1.0 + p.epsilon) * line_case.predicted.c2 / line_case.predicted.c1;
    let dyadic: Vec<DyadicEmptiness> = (1..=p.dyadic_n_max)
        .map(|n| {
            let x = dy.nearest(&[2f64.powi(n as i32)]);
            DyadicEmptiness {
                n,
                nu,
                empty: hom_space::annulus_is_empty(&dy, x, 2.0, nu),
            }
        })
        .collect();
    let dyadic_large_n_empty = dyadic.last().map(|d| d.empty).unwrap_or(false);

    // Kernel family on the normalized interval.
    let tau_delta = hom_space::triangle_constant(&normalized)? * p.safety;
    let atom = normalized.masses().iter().cloned().fold(0.0, f64::max);
    let total = normalized.total_mass();
    let a_delta = hom_space::doubling_constant(
        &normalized,
        &hom_space::grid_probes(&normalized, 5, &log_space(2.0 * atom, total / 2.0, 12)),
    )? * p.safety;
    let gamma = p.maximal_gamma;
    if gamma * tau_delta >= 1.0 {
        return Err(Error::Precondition(format!(
            "gamma = {gamma} is too large for the normalized quasi-triangle constant {tau_delta}"
        )));
    }
    // On the ball B(xi, gamma delta(x, xi)) the distance to x stays within
    // [delta / tau - gamma delta, tau (1 + gamma) delta].
    let ball_h =
        (tau_delta * tau_delta * (1.0 + gamma) / (1.0 - gamma * tau_delta)).powf(1.0 + p.s);
    let mut members = Vec::new();
    let mut kernels = Vec::new();
    for &t in &p.scales {
        let (alpha, k) = family_kernel(&normalized, p.s, t);
        let ball = harnack::certify_ball_harnack_finite(&normalized, &k, gamma, ball_h)?;
        let reg = harnack::regularize_finite(&normalized, &k, gamma)?;
        let sandwich = harnack::sandwich_ratios_finite(&k, &reg);
        kernels.push(KernelChecks {
            scale: t,
            alpha,
            sandwich_passed: sandwich.0 <= ball_h && sandwich.1 <= ball_h,
            sandwich,
            ball: ball.clone(),
        });
        members.push((alpha, k, ball));
    }
    let f: Vec<f64> = normalized
        .positions()
        .iter()
        .map(|&x| (1.0 - (x - 0.5).abs() * 4.0).max(0.0))
        .collect();
    let family: Vec<(KernelMatrix, HarnackCertificate)> = members
        .iter()
        .map(|(_, k, c)| (k.clone(), c.clone()))
        .collect();
    let maximal = if family.iter().all(|(_, c)| c.passed) {
        hom_space::space_maximal_check(
            &normalized,
            GeometryConstants {
                tau: tau_delta,
                a: a_delta,
            },
            &family,
            &f,
            1e-12,
        )?
    } else {
        return Err(Error::Precondition(
            "a family member failed its ball Harnack certificate".into(),
        ));
    };

    // Concentration with the measured normal constants of the interval.
    let (c1, c2) = (line_case.measured_c1, line_case.measured_c2);
    let conc_gamma = 0.9 * (c1 / (2.0 * c2)).powi(2);
    let setup = GeneralConcentrationSetup {
        gamma: conc_gamma,
        lambda: p.lambda * total,
        s: p.s,
        r: p.stability_radius * total,
        h: conc_gamma.powf(-1.0 - p.s) * p.safety,
        c1,
        c2,
        annulus_radii: log_space(2.0 * atom, total, 24),
    };
    let family: Vec<(f64, KernelMatrix)> = members.into_iter().map(|(a, k, _)| (a, k)).collect();
    let concentration = hom_space::general_concentration_run(&normalized, &family, &setup)?;
    let first = concentration
        .points
        .first()
        .map(|p| p.max_tail_mass)
        .unwrap_or(f64::NAN);
    let last = concentration
        .points
        .last()
        .map(|p| p.max_tail_mass)
        .unwrap_or(f64::NAN);
    let concentration_ratio = last / first;

    let passed = reference_exact
        && line_case.report.passed
        && half_case.report.passed
        && line_case
            .report
            .annulus_lemma
            .as_ref()
            .is_some_and(|a| a.passed)
        && half_case
            .report
            .annulus_lemma
            .as_ref()
            .is_some_and(|a| a.passed)
        && gapped_brackets_three
        && dyadic_large_n_empty
        && kernels.iter().all(|k| k.ball.passed && k.sandwich_passed)
        && maximal.passed
        && maximal.atom_passed
        && concentration.decreasing
        && concentration_ratio < 0.01;
    Ok(HomspaceSuiteReport {
        predicted_reference: reference,
        predicted_reference_exact: reference_exact,
        normality: vec![line_case, half_case],
        gapped_union,
        gapped_brackets_three,
        dyadic,
        dyadic_large_n_empty,
        ball_h,
        kernels,
        maximal,
        concentration,
        concentration_ratio,
        passed,
    })
}
