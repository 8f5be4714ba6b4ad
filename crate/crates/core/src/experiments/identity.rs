use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::convolve::{convolve, ConvolveOptions, Extension};
use super::functions::{GridSpec, TestFunction};
use crate::concentration::{selection_admissible, Criterion, SelectionFunction};
use crate::error::{Error, Result};
use crate::kernels::{mollify, LevyOptions, LevyTable, PoissonProfile, SharedProfile, SigmaOrder};

/// Kernel families driven toward the identity (or away from it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdentityFamily {
    /// `P^{Sigma(y)}_y` on the line, parameter `y`.
    Poisson { selection: SelectionFunction },
    /// `L^{Sigma(y)}_y` on the line, parameter `y`.
    Levy { selection: SelectionFunction },
    /// `P^sigma_y` at fixed `y`, parameter `sigma`.
    PoissonFixedScale { y: f64 },
}

impl IdentityFamily {
    fn order_and_scale(&self, param: f64) -> Result<(SigmaOrder, f64)> {
        match *self {
            Self::Poisson { selection } | Self::Levy { selection } => {
                Ok((selection.order(param)?, param))
            }
            Self::PoissonFixedScale { y } => Ok((SigmaOrder::new(param)?, y)),
        }
    }

    pub fn kernel(&self, param: f64) -> Result<SharedProfile> {
        let (sigma, y) = self.order_and_scale(param)?;
        let unit: SharedProfile = match self {
            Self::Levy { .. } => Arc::new(LevyTable::new(
                sigma.get(),
                &LevyOptions {
                    sigma_min: 1e-2,
                    ..Default::default()
                },
            )?),
            _ => Arc::new(PoissonProfile::new(1, sigma)?),
        };
        Ok(Arc::new(mollify(unit, y)?))
    }

    fn admissibility(&self) -> Option<(SelectionFunction, Criterion)> {
        match *self {
            Self::Poisson { selection } => Some((selection, Criterion::Poisson)),
            Self::Levy { selection } => Some((selection, Criterion::Levy)),
            Self::PoissonFixedScale { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Poisson { selection } => format!("poisson(Sigma = {})", selection.label()),
            Self::Levy { selection } => format!("levy(Sigma = {})", selection.label()),
            Self::PoissonFixedScale { y } => format!("poisson(y = {y}, sigma -> 0)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    /// Max over nodes of `|K * f - f|`; used for continuous `f`.
    SupNode,
    /// `h sum |K * f - f|`; used for discontinuous `f`.
    L1Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPoint {
    pub param: f64,
    pub sigma: f64,
    pub y: f64,
    pub sup_error: f64,
    pub l1_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub family: String,
    pub function: String,
    pub mode: ErrorMode,
    pub points: Vec<ErrorPoint>,
    /// Strictly decreasing over the last decade of the schedule.
    pub decreasing: bool,
    pub terminal: f64,
    pub tol: f64,
    pub converged: bool,
    pub note: String,
}

impl ErrorCurve {
    pub fn errors(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| match self.mode {
                ErrorMode::SupNode => p.sup_error,
                ErrorMode::L1Grid => p.l1_error,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityOptions {
    /// Terminal error required for convergence.
    pub tol: f64,
    /// Terminal criterion value required for admissibility.
    pub admissibility_threshold: f64,
    pub convolve: ConvolveOptions,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        Self {
            tol: 1e-2,
            admissibility_threshold: 0.1,
            convolve: ConvolveOptions::default(),
        }
    }
}

/// Errors of `K_param * f - f` along a parameter schedule decreasing to 0.
/// Selection families are refused when the selection fails its criterion
/// on the schedule.
pub fn approx_identity_run(
    family: &IdentityFamily,
    f: &TestFunction,
    grid: &GridSpec,
    schedule: &[f64],
    opts: &IdentityOptions,
) -> Result<ErrorCurve> {
    if let Some((selection, criterion)) = family.admissibility() {
        let report = selection_admissible(
            &selection,
            criterion,
            schedule,
            opts.admissibility_threshold,
        )?;
        if !report.admissible {
            return Err(Error::Precondition(format!(
                "selection {} fails the {criterion:?} criterion on the schedule: terminal value {:.4e} \
                 (threshold {}), decreasing over the last decade: {}",
                selection.label(),
                report.terminal,
                report.threshold,
                report.decreasing
            )));
        }
    } else if schedule.windows(2).any(|w| w[1] >= w[0]) || schedule.is_empty() {
        return Err(Error::Precondition(
            "schedule must decrease toward 0".into(),
        ));
    }
    let g = f.realize(grid)?;
    let mut conv = opts.convolve;
    if f.extends_beyond_support() {
        conv.extension = Extension::Constant;
    }
    let mut points = Vec::with_capacity(schedule.len());
    for &param in schedule {
        let (sigma, y) = family.order_and_scale(param)?;
        let k = family.kernel(param)?;
        let kf = convolve(k.as_ref(), &g, &conv)?;
        let diffs: Vec<f64> = kf
            .values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| (a - b).abs())
            .collect();
        points.push(ErrorPoint {
            param,
            sigma: sigma.get(),
            y,
            sup_error: diffs.iter().cloned().fold(0.0, f64::max),
            l1_error: diffs.iter().sum::<f64>() * g.spacing(),
        });
    }
    let mode = if f.is_continuous() {
        ErrorMode::SupNode
    } else {
        ErrorMode::L1Grid
    };
    let mut curve = ErrorCurve {
        family: family.label(),
        function: f.label(),
        mode,
        points,
        decreasing: false,
        terminal: f64::NAN,
        tol: opts.tol,
        converged: false,
        note: "almost-everywhere convergence is read as sup-node error for continuous f \
               and grid L1 error for discontinuous f"
            .into(),
    };
    let errors = curve.errors();
    let last = *schedule.last().unwrap();
    let start = schedule
        .iter()
        .position(|&p| p <= 10.0 * last)
        .unwrap_or(0)
        .saturating_sub(1);
    curve.decreasing = errors.len() >= 2 && errors[start..].windows(2).all(|w| w[1] < w[0]);
    curve.terminal = *errors.last().unwrap();
    curve.converged = curve.decreasing && curve.terminal < opts.tol;
    Ok(curve)
}
