//! Tail masses of kernel families, admissibility of stability-order
//! selections, and the explicit tail bounds for the Poisson, Lévy and
//! general stable families.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::harnack::{PointKernel, RadialKernel};
use crate::kernels::{self, mollify, LevyDirect, LevyOptions, PoissonProfile, Scale, SigmaOrder};
use crate::quad::{self, QuadOptions};
use crate::special::omega;

/// A rule `y -> Sigma(y)` picking a stability order for each scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionFunction {
    /// `Sigma(y) = ln(1/y)^{-alpha}`.
    LogPower {
        alpha: f64,
    },
    /// `Sigma(y) = y^epsilon`.
    Power {
        epsilon: f64,
    },
    Constant {
        sigma: f64,
    },
}

impl SelectionFunction {
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            Self::LogPower { alpha } => (-y.ln()).powf(-alpha),
            Self::Power { epsilon } => y.powf(epsilon),
            Self::Constant { sigma } => sigma,
        }
    }

    /// `Sigma(y)` as a validated order; fails outside (0, 2).
    pub fn order(&self, y: f64) -> Result<SigmaOrder> {
        let s = self.eval(y);
        SigmaOrder::new(s).map_err(|_| {
            invalid(
                "Sigma(y)",
                s,
                format!("selection {} leaves (0, 2) at y = {y}", self.label()),
            )
        })
    }

    pub fn label(&self) -> String {
        match *self {
            Self::LogPower { alpha } => format!("ln(1/y)^-{alpha}"),
            Self::Power { epsilon } => format!("y^{epsilon}"),
            Self::Constant { sigma } => format!("const {sigma}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `y^{Sigma(y)} -> 0`, i.e. `Sigma(y) ln y -> -inf`.
    Poisson,
    /// `y^{Sigma(y) + 1/2} / Sigma(y) -> 0`.
    Levy,
}

impl Criterion {
    pub fn functional(self, y: f64, sigma: f64) -> f64 {
        match self {
            Self::Poisson => (sigma * y.ln()).exp(),
            Self::Levy => ((sigma + 0.5) * y.ln()).exp() / sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSample {
    pub y: f64,
    pub sigma: f64,
    pub functional: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub selection: SelectionFunction,
    pub criterion: Criterion,
    pub samples: Vec<CriterionSample>,
    /// Strictly decreasing over the last decade of the grid.
    pub decreasing: bool,
    pub terminal: f64,
    pub threshold: f64,
    pub admissible: bool,
}

/// Evaluates the criterion functional along a decreasing `y` grid. The
/// verdict only describes the grid: strictly decreasing over the final
/// decade (relative margin 1e-9) and a terminal value below `threshold`.
pub fn selection_admissible(
    selection: &SelectionFunction,
    criterion: Criterion,
    y_grid: &[f64],
    threshold: f64,
) -> Result<AdmissibilityReport> {
    check_schedule(y_grid)?;
    let samples = y_grid
        .iter()
        .map(|&y| {
            let sigma = selection.order(y)?.get();
            Ok(CriterionSample {
                y,
                sigma,
                functional: criterion.functional(y, sigma),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let last_y = *y_grid.last().unwrap();
    let start = y_grid
        .iter()
        .position(|&y| y <= 10.0 * last_y)
        .unwrap_or(0)
        .saturating_sub(1);
    let tail = &samples[start..];
    let decreasing = tail.len() >= 2
        && tail
            .windows(2)
            .all(|w| w[1].functional < w[0].functional * (1.0 - 1e-9));
    let terminal = samples.last().unwrap().functional;
    Ok(AdmissibilityReport {
        selection: *selection,
        criterion,
        samples,
        decreasing,
        terminal,
        threshold,
        admissible: decreasing && terminal < threshold,
    })
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Empty("parameter schedule"));
    }
    if schedule.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::Precondition(
            "schedule entries must be positive and finite".into(),
        ));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(
            "schedule must decrease toward 0".into(),
        ));
    }
    Ok(())
}

/// `int_{|z - x| >= lambda} K(x, z) dz`, clamped to [0, 1].
///
/// Radial kernels go through the profile's outer mass; other kernels are
/// integrated directly, which is only implemented on the line.
pub fn tail_mass(
    kernel: &dyn PointKernel,
    x: &[f64],
    lambda: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", lambda, "must be positive"));
    }
    if x.len() != kernel.dim() {
        return Err(Error::Dimension(format!(
            "probe has {} coordinates, kernel lives in dimension {}",
            x.len(),
            kernel.dim()
        )));
    }
    let m = if let Some(profile) = kernel.as_radial() {
        kernels::outer_mass(profile, lambda, opts)?
    } else if kernel.dim() == 1 {
        let x0 = x[0];
        let f = |t: f64| kernel.eval(x, &[x0 + t]) + kernel.eval(x, &[x0 - t]);
        let near = quad::integrate_with_breaks(
            f,
            &quad::geometric_breaks(lambda, 1e3 * lambda, lambda),
            opts,
        )?;
        let far = quad::integrate_to_infinity(f, 1e3 * lambda, opts)?;
        near.value + far.value
    } else {
        return Err(Error::Dimension(
            "tail mass of a non-radial kernel is only implemented for n = 1".into(),
        ));
    };
    if !m.is_finite() {
        return Err(invalid(
            "tail mass",
            m,
            "quadrature produced a non-finite value",
        ));
    }
    Ok(m.clamp(0.0, 1.0))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid("lambda", lambda, "must be positive and finite"))
    }
}

/// `2^{(n + s)/2} (lambda / y)^{-s}` with `s = Sigma(y)`.
pub fn theorem21_tail_bound(n: usize, lambda: f64, y: Scale, sigma_y: SigmaOrder) -> Result<f64> {
    check_lambda(lambda)?;
    let s = sigma_y.get();
    Ok(2f64.powf((n as f64 + s) / 2.0) * (lambda / y.get()).powf(-s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampedBound {
    pub value: f64,
    pub lambda_used: f64,
    pub note: Option<String>,
}

/// `(4 pi^2 / lambda^2) sqrt(y) y^s / s`; `lambda > 1` is replaced by 1 and
/// the replacement is noted.
pub fn theorem23_tail_bound(lambda: f64, y: Scale, sigma_y: SigmaOrder) -> Result<ClampedBound> {
    check_lambda(lambda)?;
    let (lambda_used, note) = if lambda > 1.0 {
        (
            1.0,
            Some(format!(
                "lambda = {lambda} clamped to 1; the bound is stated for lambda <= 1"
            )),
        )
    } else {
        (lambda, None)
    };
    let y = y.get();
    let s = sigma_y.get();
    let four_pi2 = 4.0 * std::f64::consts::PI.powi(2);
    Ok(ClampedBound {
        value: four_pi2 / (lambda_used * lambda_used) * y.sqrt() * y.powf(s) / s,
        lambda_used,
        note,
    })
}

/// Tail bound for a kernel in `S(sigma, alpha)` with the Harnack property on
/// balls of ratio `gamma`.
pub fn theorem34_tail_bound(
    n: usize,
    sigma: SigmaOrder,
    gamma: f64,
    alpha: f64,
    lambda: f64,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", gamma, "must lie in (0, 1)"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha", alpha, "must be positive"));
    }
    check_lambda(lambda)?;
    let s = sigma.get();
    let w = omega(n);
    let up = (1.0 + gamma).powf(s);
    let down = (1.0 - gamma).powf(s);
    let ratio = ((1.0 + gamma) / (1.0 - gamma)).powi(n as i32);
    Ok(2.0 * w * alpha / s + 2.0 * w * alpha * ratio * up / (up - down) * lambda.powf(-s))
}

/// Scale at which the Poisson kernel of order `sigma` has stability
/// parameter `alpha`: `y^sigma / I = alpha`.
pub fn poisson_scale_for_alpha(n: usize, sigma: SigmaOrder, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", alpha, "must be positive"));
    }
    let norm = kernels::poisson_normalizer(n, sigma)?;
    Ok((alpha * norm).powf(1.0 / sigma.get()))
}

/// A one-parameter family of kernels indexed by a positive parameter that
/// is driven toward zero.
pub trait KernelFamily: Send + Sync {
    fn dim(&self) -> usize;
    fn kernel(&self, param: f64) -> Result<Arc<dyn PointKernel>>;
    /// Convolution families: the tail mass does not depend on the probe.
    fn translation_invariant(&self) -> bool;
    fn parameter_name(&self) -> &'static str {
        "y"
    }
    fn selection(&self) -> Option<SelectionFunction> {
        None
    }
    fn label(&self) -> String;
}

/// `P^{Sigma(y)}_y`, indexed by `y`.
#[derive(Debug, Clone, Copy)]
pub struct PoissonSelection {
    pub n: usize,
    pub selection: SelectionFunction,
}

impl KernelFamily for PoissonSelection {
    fn dim(&self) -> usize {
        self.n
    }
    fn kernel(&self, y: f64) -> Result<Arc<dyn PointKernel>> {
        let sigma = self.selection.order(y)?;
        let p = Arc::new(PoissonProfile::new(self.n, sigma)?);
        Ok(Arc::new(RadialKernel::new(Arc::new(mollify(p, y)?))))
    }
    fn translation_invariant(&self) -> bool {
        true
    }
    fn selection(&self) -> Option<SelectionFunction> {
        Some(self.selection)
    }
    fn label(&self) -> String {
        format!(
            "poisson(n = {}, Sigma = {})",
            self.n,
            self.selection.label()
        )
    }
}

/// `P^sigma_y` at a fixed scale, indexed by `sigma`.
#[derive(Debug, Clone, Copy)]
pub struct PoissonSigmaSweep {
    pub n: usize,
    pub y: f64,
}

impl KernelFamily for PoissonSigmaSweep {
    fn dim(&self) -> usize {
        self.n
    }
    fn kernel(&self, sigma: f64) -> Result<Arc<dyn PointKernel>> {
        let p = Arc::new(PoissonProfile::new(self.n, SigmaOrder::new(sigma)?)?);
        Ok(Arc::new(RadialKernel::new(Arc::new(mollify(p, self.y)?))))
    }
    fn translation_invariant(&self) -> bool {
        true
    }
    fn parameter_name(&self) -> &'static str {
        "sigma"
    }
    fn label(&self) -> String {
        format!("poisson(n = {}, y = {})", self.n, self.y)
    }
}

/// The one-dimensional Lévy kernel `L^{Sigma(y)}_y`, indexed by `y`.
#[derive(Debug, Clone, Copy)]
pub struct LevySelection {
    pub selection: SelectionFunction,
    pub opts: LevyOptions,
}

impl KernelFamily for LevySelection {
    fn dim(&self) -> usize {
        1
    }
    fn kernel(&self, y: f64) -> Result<Arc<dyn PointKernel>> {
        let sigma = self.selection.order(y)?.get();
        let p = Arc::new(LevyDirect::new(sigma, self.opts)?);
        Ok(Arc::new(RadialKernel::new(Arc::new(mollify(p, y)?))))
    }
    fn translation_invariant(&self) -> bool {
        true
    }
    fn selection(&self) -> Option<SelectionFunction> {
        Some(self.selection)
    }
    fn label(&self) -> String {
        format!("levy(Sigma = {})", self.selection.label())
    }
}

/// The same kernel for every parameter.
pub struct ConstantFamily {
    pub kernel: Arc<dyn PointKernel>,
    pub translation_invariant: bool,
}

impl KernelFamily for ConstantFamily {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }
    fn kernel(&self, _param: f64) -> Result<Arc<dyn PointKernel>> {
        Ok(self.kernel.clone())
    }
    fn translation_invariant(&self) -> bool {
        self.translation_invariant
    }
    fn parameter_name(&self) -> &'static str {
        "tau"
    }
    fn label(&self) -> String {
        format!("constant({})", self.kernel.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCurve {
    pub family: String,
    pub parameter: String,
    pub selection: Option<SelectionFunction>,
    pub lambda: f64,
    pub probes: Vec<Vec<f64>>,
    pub params: Vec<f64>,
    /// Max over probes of the tail mass, one entry per parameter.
    pub max_tail_mass: Vec<f64>,
}

impl ConcentrationCurve {
    pub fn terminal(&self) -> f64 {
        *self.max_tail_mass.last().unwrap_or(&f64::NAN)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.max_tail_mass.windows(2).all(|w| w[1] < w[0])
    }

    /// Columns `param, lambda, max_tail_mass`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["param", "lambda", "max_tail_mass"])?;
        for (p, m) in self.params.iter().zip(&self.max_tail_mass) {
            w.write_record([p.to_string(), self.lambda.to_string(), m.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Tail mass beyond `lambda` along a decreasing parameter schedule, as a
/// max over the probe points. Translation-invariant families use the first
/// probe only.
pub fn concentration_curve(
    family: &dyn KernelFamily,
    lambda: f64,
    schedule: &[f64],
    probes: &[Vec<f64>],
    opts: &QuadOptions,
) -> Result<ConcentrationCurve> {
    check_schedule(schedule)?;
    check_lambda(lambda)?;
    if probes.is_empty() {
        return Err(Error::Empty("probe points"));
    }
    let probes: Vec<Vec<f64>> = if family.translation_invariant() {
        probes[..1].to_vec()
    } else {
        probes.to_vec()
    };
    let kernels = schedule
        .par_iter()
        .map(|&p| family.kernel(p))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..schedule.len())
        .flat_map(|i| (0..probes.len()).map(move |j| (i, j)))
        .collect();
    let masses = pairs
        .par_iter()
        .map(|&(i, j)| tail_mass(kernels[i].as_ref(), &probes[j], lambda, opts))
        .collect::<Result<Vec<_>>>()?;
    let max_tail_mass = masses
        .chunks(probes.len())
        .map(|c| c.iter().cloned().fold(0.0, f64::max))
        .collect();
    Ok(ConcentrationCurve {
        family: family.label(),
        parameter: family.parameter_name().into(),
        selection: family.selection(),
        lambda,
        probes,
        params: schedule.to_vec(),
        max_tail_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_examples() {
        let s = SelectionFunction::LogPower { alpha: 1.0 };
        assert!((s.eval(std::f64::consts::E.powi(-4)) - 0.25).abs() < 1e-15);
        assert!((Criterion::Poisson.functional(1e-3, s.eval(1e-3)) - (-1f64).exp()).abs() < 1e-12);
        let json = serde_json::to_string(&SelectionFunction::Power { epsilon: 0.25 }).unwrap();
        assert_eq!(json, r#"{"kind":"power","epsilon":0.25}"#);
    }

    #[test]
    fn bounds_formulae() {
        let b21 = theorem21_tail_bound(
            1,
            1.0,
            Scale::new(0.1).unwrap(),
            SigmaOrder::new(0.5).unwrap(),
        )
        .unwrap();
        assert!((b21 - 2f64.powf(0.75) * 0.1f64.sqrt()).abs() < 1e-14);
        let b34 =
            theorem34_tail_bound(1, SigmaOrder::new(1.0).unwrap(), 1.0 / 3.0, 0.01, 1.0).unwrap();
        assert!((b34 - 0.2).abs() < 1e-14);
        let b23 = theorem23_tail_bound(
            4.0,
            Scale::new(0.01).unwrap(),
            SigmaOrder::new(0.1).unwrap(),
        )
        .unwrap();
        assert_eq!(b23.lambda_used, 1.0);
        assert!(b23.note.is_some());
    }
}
