use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::maximal::GridFunction;

/// Uniform one-dimensional grid `a, a + h, ..., b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(invalid("h", self.h, "grid spacing must be positive"));
        }
        if !(self.b > self.a) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(invalid(
                "b",
                self.b,
                "grid must be a finite interval with b > a",
            ));
        }
        if (self.b - self.a) / self.h > 1e7 {
            return Err(invalid("h", self.h, "grid would exceed 10^7 nodes"));
        }
        Ok(())
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            a: -4.0,
            b: 4.0,
            h: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `max(0, 1 - |x - center| / half_width)`.
    Hat {
        center: f64,
        half_width: f64,
    },
    Indicator {
        a: f64,
        b: f64,
    },
    /// `exp(-1 / (1 - t^2))` for `|t| < 1`, `t = (x - center) / radius`, scaled to peak 1.
    GaussianBump {
        center: f64,
        radius: f64,
    },
    /// Heaviside step at `at`; continued as a constant beyond the grid.
    Step {
        at: f64,
    },
    /// Values read from a grid CSV; the grid spec is ignored.
    CustomCsv {
        path: PathBuf,
    },
}

impl Default for TestFunction {
    fn default() -> Self {
        Self::Hat {
            center: 0.0,
            half_width: 1.0,
        }
    }
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Hat { center, half_width } => (1.0 - (x - center).abs() / half_width).max(0.0),
            Self::Indicator { a, b } => {
                if x >= a && x <= b {
                    1.0
                } else {
                    0.0
                }
            }
            Self::GaussianBump { center, radius } => {
                let t = (x - center) / radius;
                if t.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            }
            Self::Step { at } => {
                if x >= at {
                    1.0
                } else {
                    0.0
                }
            }
            Self::CustomCsv { .. } => f64::NAN,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Self::Hat { .. } | Self::GaussianBump { .. })
    }

    /// Whether the function is nonzero beyond any bounded grid.
    pub fn extends_beyond_support(&self) -> bool {
        matches!(self, Self::Step { .. })
    }

    pub fn label(&self) -> String {
        match self {
            Self::Hat { center, half_width } => format!("hat({center}, {half_width})"),
            Self::Indicator { a, b } => format!("indicator[{a}, {b}]"),
            Self::GaussianBump { center, radius } => format!("bump({center}, {radius})"),
            Self::Step { at } => format!("step({at})"),
            Self::CustomCsv { path } => format!("csv({})", path.display()),
        }
    }

    pub fn realize(&self, grid: &GridSpec) -> Result<GridFunction> {
        match self {
            Self::CustomCsv { path } => GridFunction::read_csv(std::fs::File::open(path)?),
            f => {
                grid.validate()?;
                GridFunction::sample_line(grid.a, grid.b, grid.h, |x| f.eval(x))
            }
        }
    }

    /// The default suite of five test functions.
    pub fn suite() -> Vec<TestFunction> {
        vec![
            Self::default(),
            Self::Indicator { a: -1.0, b: 1.0 },
            Self::GaussianBump {
                center: 0.5,
                radius: 1.5,
            },
            Self::Hat {
                center: -1.0,
                half_width: 0.25,
            },
            Self::Indicator { a: 0.0, b: 0.5 },
        ]
    }
}
