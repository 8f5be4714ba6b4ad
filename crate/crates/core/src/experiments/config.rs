use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::functions::{GridSpec, TestFunction};
use super::homspace::HomspaceParams;
use super::identity::IdentityFamily;
use crate::concentration::SelectionFunction;
use crate::error::{Error, Result};
use crate::kernels::log_space;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    Normalizers,
    LevyAccuracy,
    HarnackSweep,
    Concentration,
    MaximalDomination,
    ZoCheck,
    HomspaceSuite,
    ApproxIdentity,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 8] = [
        Self::Normalizers,
        Self::LevyAccuracy,
        Self::HarnackSweep,
        Self::Concentration,
        Self::MaximalDomination,
        Self::ZoCheck,
        Self::HomspaceSuite,
        Self::ApproxIdentity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Normalizers => "normalizers",
            Self::LevyAccuracy => "levy-accuracy",
            Self::HarnackSweep => "harnack-sweep",
            Self::Concentration => "concentration",
            Self::MaximalDomination => "maximal-domination",
            Self::ZoCheck => "zo-check",
            Self::HomspaceSuite => "homspace-suite",
            Self::ApproxIdentity => "approx-identity",
        }
    }
}

/// A run request: the experiment, its parameters (checked against the
/// experiment's own parameter type), and run-wide settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the experiment's primary tolerance.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentName) -> Self {
        Self {
            experiment,
            seed: 0,
            tol: None,
            output_dir: None,
            params: serde_json::Value::Null,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parameters as the experiment's type; absent parameters take defaults.
    pub fn params<T: DeserializeOwned + Default>(&self) -> Result<T> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(self.params.clone())
            .map_err(|e| Error::Config(format!("{} params: {e}", self.experiment.as_str())))
    }

    /// Parses the parameters once and checks schedules and ranges.
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Config(format!("tol must be positive, got {t}")));
            }
        }
        match self.experiment {
            ExperimentName::Normalizers => self.params::<NormalizersParams>()?.validate(),
            ExperimentName::LevyAccuracy => self.params::<LevyAccuracyParams>()?.validate(),
            ExperimentName::HarnackSweep => self.params::<HarnackSweepParams>()?.validate(),
            ExperimentName::Concentration => self.params::<ConcentrationParams>()?.validate(),
            ExperimentName::MaximalDomination => {
                self.params::<MaximalDominationParams>()?.validate()
            }
            ExperimentName::ZoCheck => self.params::<ZoCheckParams>()?.validate(),
            ExperimentName::HomspaceSuite => {
                let p = self.params::<HomspaceParams>()?;
                decreasing("scales", &p.scales)
            }
            ExperimentName::ApproxIdentity => self.params::<ApproxIdentityParams>()?.validate(),
        }
    }
}

fn decreasing(name: &str, s: &[f64]) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Config(format!("{name} is empty")));
    }
    if s.iter().any(|v| !(v > &0.0) || !v.is_finite()) {
        return Err(Error::Config(format!(
            "{name} entries must be positive and finite"
        )));
    }
    if s.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config(format!("{name} must be strictly decreasing")));
    }
    Ok(())
}

fn range(name: &str, r: (f64, f64)) -> Result<()> {
    if !(r.0 > 0.0 && r.1 > r.0 && r.1.is_finite()) {
        return Err(Error::Config(format!(
            "{name} must be a positive increasing range, got {r:?}"
        )));
    }
    Ok(())
}

fn gamma_ok(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )))
    }
}

/// `10^{-k/2}` for `k = 2..=2 * decades`.
pub fn half_decades(decades: u32) -> Vec<f64> {
    (2..=2 * decades)
        .map(|k| 10f64.powf(-(k as f64) / 2.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizersParams {
    pub dims: Vec<usize>,
    pub sigmas: Vec<f64>,
    pub tol: f64,
}

impl Default for NormalizersParams {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3],
            sigmas: (1..=19).step_by(2).map(|k| k as f64 / 10.0).collect(),
            tol: 1e-9,
        }
    }
}

impl NormalizersParams {
    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Config("dims must be nonempty and positive".into()));
        }
        if self.sigmas.iter().any(|&s| !(s > 0.0 && s < 2.0)) {
            return Err(Error::Config("sigmas must lie in (0, 2)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevyAccuracyParams {
    pub rho_max: f64,
    pub points: usize,
    pub tol: f64,
    pub bg_sigmas: Vec<f64>,
    pub bg_radius: f64,
    pub bg_tol: f64,
}

impl Default for LevyAccuracyParams {
    fn default() -> Self {
        Self {
            rho_max: 50.0,
            points: 200,
            tol: 1e-8,
            bg_sigmas: vec![0.5, 1.0, 1.5],
            bg_radius: 1e3,
            bg_tol: 0.05,
        }
    }
}

impl LevyAccuracyParams {
    fn validate(&self) -> Result<()> {
        if !(self.rho_max > 0.0) || self.points < 2 || !(self.bg_radius > 8.0) {
            return Err(Error::Config(
                "levy-accuracy needs rho_max > 0, points >= 2, bg_radius > 8".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Poisson { n: usize, sigma: f64 },
    Gaussian { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Pass,
    Refute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnackSweepParams {
    pub kernel: KernelSpec,
    pub gamma: f64,
    /// Defaults to `((1+gamma)/(1-gamma))^{n+sigma}` for Poisson and `10^6` for Gaussian.
    pub h: Option<f64>,
    pub y: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub count: usize,
    /// Extra poles drawn uniformly from `[-pole_spread, pole_spread]^n` with the run seed.
    pub random_poles: usize,
    pub pole_spread: f64,
    /// Defaults to `pass` for Poisson, `refute` for Gaussian.
    pub expect: Option<Expectation>,
}

impl Default for HarnackSweepParams {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::Poisson { n: 1, sigma: 1.0 },
            gamma: 1.0 / 3.0,
            h: None,
            y: 1.0,
            d_min: 1e-3,
            d_max: 1e3,
            count: 61,
            random_poles: 0,
            pole_spread: 10.0,
            expect: None,
        }
    }
}

impl HarnackSweepParams {
    fn validate(&self) -> Result<()> {
        gamma_ok(self.gamma)?;
        range("distance range", (self.d_min, self.d_max))?;
        if self.count < 2 || !(self.y > 0.0) {
            return Err(Error::Config(
                "harnack-sweep needs count >= 2 and y > 0".into(),
            ));
        }
        match self.kernel {
            KernelSpec::Poisson { n, sigma } if n == 0 || !(sigma > 0.0 && sigma < 2.0) => Err(
                Error::Config("poisson kernel needs n >= 1 and sigma in (0, 2)".into()),
            ),
            KernelSpec::Gaussian { n: 0 } => {
                Err(Error::Config("gaussian kernel needs n >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConcentrationKernel {
    Poisson { n: usize },
    Levy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationParams {
    pub kernel: ConcentrationKernel,
    pub selection: SelectionFunction,
    /// Defaults to half decades down to `1e-10` for Poisson and `1e-6` for Lévy.
    pub y_schedule: Option<Vec<f64>>,
    pub lambda: f64,
    /// Terminal tail mass required.
    pub epsilon: f64,
    pub admissibility_threshold: f64,
}

impl Default for ConcentrationParams {
    fn default() -> Self {
        Self {
            kernel: ConcentrationKernel::Poisson { n: 1 },
            selection: SelectionFunction::LogPower { alpha: 0.5 },
            y_schedule: None,
            lambda: 1.0,
            epsilon: 0.01,
            admissibility_threshold: 0.1,
        }
    }
}

impl ConcentrationParams {
    pub fn schedule(&self) -> Vec<f64> {
        match (&self.y_schedule, self.kernel) {
            (Some(s), _) => s.clone(),
            (None, ConcentrationKernel::Poisson { .. }) => half_decades(10),
            (None, ConcentrationKernel::Levy) => half_decades(6),
        }
    }

    fn validate(&self) -> Result<()> {
        decreasing("y_schedule", &self.schedule())?;
        if let ConcentrationKernel::Poisson { n: 0 } = self.kernel {
            return Err(Error::Config("poisson kernel needs n >= 1".into()));
        }
        if !(self.lambda > 0.0) || !(self.epsilon > 0.0) {
            return Err(Error::Config("lambda and epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalDominationParams {
    pub gamma: f64,
    pub sigma_range: (f64, f64),
    pub y_range: (f64, f64),
    pub n_sigma: usize,
    pub n_y: usize,
    pub grid: GridSpec,
    pub functions: Vec<TestFunction>,
    /// Largest relative change of the family maximal function when both
    /// parameter axes are doubled.
    pub refinement_tol: f64,
}

impl Default for MaximalDominationParams {
    fn default() -> Self {
        Self {
            gamma: 1.0 / 3.0,
            sigma_range: (0.1, 1.9),
            y_range: (0.01, 10.0),
            n_sigma: 16,
            n_y: 16,
            grid: GridSpec {
                a: -4.0,
                b: 4.0,
                h: 0.02,
            },
            functions: TestFunction::suite(),
            refinement_tol: 0.02,
        }
    }
}

impl MaximalDominationParams {
    fn validate(&self) -> Result<()> {
        gamma_ok(self.gamma)?;
        range("sigma_range", self.sigma_range)?;
        range("y_range", self.y_range)?;
        self.grid.validate()?;
        if self.sigma_range.1 >= 2.0
            || self.n_sigma < 1
            || self.n_y < 1
            || self.functions.is_empty()
        {
            return Err(Error::Config(
                "maximal-domination needs sigma < 2, nonempty axes and functions".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZoCheckParams {
    pub sigma_range: (f64, f64),
    pub y_range: (f64, f64),
    pub n_sigma: usize,
    pub n_y: usize,
    pub z: Vec<f64>,
    pub x_extent: f64,
    /// Allowed relative spread around the median.
    pub band: f64,
    pub phi3_sigmas: Vec<f64>,
    pub phi3_rhos: Vec<f64>,
}

impl Default for ZoCheckParams {
    fn default() -> Self {
        Self {
            sigma_range: (0.25, 1.75),
            y_range: (1e-3, 1e3),
            n_sigma: 12,
            n_y: 12,
            z: log_space(1e-2, 1e2, 9),
            x_extent: 1e4,
            band: 0.05,
            phi3_sigmas: vec![0.25, 0.5, 1.0, 1.5, 1.9],
            phi3_rhos: log_space(0.1, 1e3, 41),
        }
    }
}

impl ZoCheckParams {
    fn validate(&self) -> Result<()> {
        range("sigma_range", self.sigma_range)?;
        range("y_range", self.y_range)?;
        if self.sigma_range.1 >= 2.0 || self.z.is_empty() || self.z.contains(&0.0) {
            return Err(Error::Config(
                "zo-check needs sigma < 2 and nonzero offsets".into(),
            ));
        }
        let zmax = self.z.iter().fold(0.0f64, |m, z| m.max(z.abs()));
        if self.x_extent < 4.0 * zmax {
            return Err(Error::Config(format!(
                "x_extent must be at least 4 max|z| = {}",
                4.0 * zmax
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityExpectation {
    Converge,
    Dissipate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxIdentityParams {
    pub family: IdentityFamily,
    pub function: TestFunction,
    pub grid: GridSpec,
    /// Defaults depend on the family.
    pub schedule: Option<Vec<f64>>,
    pub tol: f64,
    pub admissibility_threshold: f64,
    /// Defaults to `dissipate` for fixed-scale families and `converge` otherwise.
    pub expect: Option<IdentityExpectation>,
}

impl Default for ApproxIdentityParams {
    fn default() -> Self {
        Self {
            family: IdentityFamily::Poisson {
                selection: SelectionFunction::LogPower { alpha: 0.5 },
            },
            function: TestFunction::default(),
            grid: GridSpec::default(),
            schedule: None,
            tol: 1e-2,
            admissibility_threshold: 0.1,
            expect: None,
        }
    }
}

impl ApproxIdentityParams {
    pub fn schedule(&self) -> Vec<f64> {
        if let Some(s) = &self.schedule {
            return s.clone();
        }
        match self.family {
            IdentityFamily::Poisson { .. } => half_decades(10),
            IdentityFamily::Levy { .. } => half_decades(6),
            IdentityFamily::PoissonFixedScale { .. } => {
                vec![1.9, 1.5, 1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01]
            }
        }
    }

    pub fn expectation(&self) -> IdentityExpectation {
        self.expect.unwrap_or(match self.family {
            IdentityFamily::PoissonFixedScale { .. } => IdentityExpectation::Dissipate,
            _ => IdentityExpectation::Converge,
        })
    }

    fn validate(&self) -> Result<()> {
        decreasing("schedule", &self.schedule())?;
        if !matches!(self.function, TestFunction::CustomCsv { .. }) {
            self.grid.validate()?;
        }
        Ok(())
    }
}
