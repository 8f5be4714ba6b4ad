use std::f64::consts::PI;

use statrs::function::erf::{erf, erfc};
use statrs::function::gamma::gamma_ur;

use super::RadialProfile;

/// The Gaussian endpoint of the stable family: the density with Fourier
/// transform `exp(-|xi|^2)`, i.e. `(4 pi)^{-n/2} exp(-rho^2 / 4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    n: usize,
}

impl GaussianProfile {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self { n }
    }
}

impl RadialProfile for GaussianProfile {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, rho: f64) -> f64 {
        (4.0 * PI).powf(-(self.n as f64) / 2.0) * (-rho * rho / 4.0).exp()
    }

    fn is_decreasing(&self) -> bool {
        true
    }

    fn total_mass_hint(&self) -> Option<f64> {
        Some(1.0)
    }

    fn length_scale(&self) -> f64 {
        2.0
    }

    fn outer_mass(&self, r: f64) -> Option<f64> {
        Some(match self.n {
            1 => erfc(r / 2.0),
            2 => (-r * r / 4.0).exp(),
            n => gamma_ur(n as f64 / 2.0, r * r / 4.0),
        })
    }

    fn radial_integral(&self, k: u32, u: f64) -> Option<f64> {
        if self.n != 1 {
            return None;
        }
        match k {
            0 => Some(0.5 * erf(u / 2.0)),
            1 => Some(-(-u * u / 4.0).exp_m1() / PI.sqrt()),
            _ => None,
        }
    }

    fn label(&self) -> String {
        format!("gaussian(n = {})", self.n)
    }
}
