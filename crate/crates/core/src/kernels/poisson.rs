use super::{RadialProfile, Scale, SigmaOrder};
use crate::error::{invalid, Result};
use crate::quad::{self, QuadOptions};
use crate::special::omega;

fn tight() -> QuadOptions {
    QuadOptions::with_tol(1e-15, 1e-13)
}

/// `int_a^inf rho^{n-1} (1 + rho^2)^{-(n+sigma)/2} d rho` for `a >= 0`.
///
/// Beyond `rho = 1` the integral is taken in `u = 1/rho`, where it becomes
/// `int_0^{1/a} u^{sigma-1} (1+u^2)^{-(n+sigma)/2} du`; the singular part
/// `u^{sigma-1}` is integrated in closed form.
pub fn poisson_radial_tail(n: usize, sigma: SigmaOrder, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", 0.0, "dimension must be at least 1"));
    }
    if !(a >= 0.0) {
        return Err(invalid("a", a, "radius must be nonnegative"));
    }
    let s = sigma.get();
    let p = (n as f64 + s) / 2.0;
    let opts = tight();
    if a >= 1.0 {
        let b = 1.0 / a;
        let regular = quad::integrate(
            |u: f64| {
                if u == 0.0 {
                    0.0
                } else {
                    u.powf(s - 1.0) * (-p * (u * u).ln_1p()).exp_m1()
                }
            },
            0.0,
            b,
            &opts,
        )?;
        return Ok(regular.value + b.powf(s) / s);
    }
    let inner = quad::integrate(
        |rho: f64| rho.powi(n as i32 - 1) * (-p * (rho * rho).ln_1p()).exp(),
        a,
        1.0,
        &opts,
    )?;
    Ok(inner.value + poisson_radial_tail(n, sigma, 1.0)?)
}

/// The normalizer `omega_n int_0^inf (1+rho^2)^{-(n+sigma)/2} rho^{n-1} d rho`.
pub fn poisson_normalizer(n: usize, sigma: SigmaOrder) -> Result<f64> {
    Ok(omega(n) * poisson_radial_tail(n, sigma, 0.0)?)
}

/// Density of the Cauchy-Poisson kernel at scale `y` and point `x`.
pub fn poisson_eval(n: usize, sigma: SigmaOrder, y: Scale, x: &[f64]) -> Result<f64> {
    if x.len() != n {
        return Err(crate::Error::Dimension(format!(
            "point has {} coordinates, expected {n}",
            x.len()
        )));
    }
    let norm = poisson_normalizer(n, sigma)?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok(PoissonProfile::from_parts(n, sigma.get(), norm).at_scale(y.get(), r2))
}

/// The unit-scale profile `rho -> (1+rho^2)^{-(n+sigma)/2} / I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonProfile {
    n: usize,
    sigma: f64,
    normalizer: f64,
}

impl PoissonProfile {
    pub fn new(n: usize, sigma: SigmaOrder) -> Result<Self> {
        Ok(Self::from_parts(
            n,
            sigma.get(),
            poisson_normalizer(n, sigma)?,
        ))
    }

    fn from_parts(n: usize, sigma: f64, normalizer: f64) -> Self {
        Self {
            n,
            sigma,
            normalizer,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// `y^sigma (y^2 + r^2)^{-(n+sigma)/2} / I`, given the squared radius.
    pub fn at_scale(&self, y: f64, r2: f64) -> f64 {
        let p = (self.n as f64 + self.sigma) / 2.0;
        y.powf(self.sigma) * (y * y + r2).powf(-p) / self.normalizer
    }

    /// Exact tail limit `lim rho^{n+sigma} P(rho) = 1/I`.
    pub fn tail_limit(&self) -> f64 {
        1.0 / self.normalizer
    }
}

impl RadialProfile for PoissonProfile {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, rho: f64) -> f64 {
        let p = (self.n as f64 + self.sigma) / 2.0;
        (-p * (rho * rho).ln_1p()).exp() / self.normalizer
    }

    fn is_decreasing(&self) -> bool {
        true
    }

    fn total_mass_hint(&self) -> Option<f64> {
        Some(1.0)
    }

    fn outer_mass(&self, r: f64) -> Option<f64> {
        let sigma = SigmaOrder::new(self.sigma).ok()?;
        poisson_radial_tail(self.n, sigma, r)
            .ok()
            .map(|t| omega(self.n) * t / self.normalizer)
    }

    fn radial_integral(&self, k: u32, u: f64) -> Option<f64> {
        if self.n != 1 || u <= 0.0 {
            return if u <= 0.0 { Some(0.0) } else { None };
        }
        match k {
            0 => {
                if u <= 1.0 {
                    let r = quad::integrate(|rho| self.eval(rho), 0.0, u, &tight()).ok()?;
                    Some(r.value)
                } else {
                    Some(0.5 - 0.5 * self.outer_mass(u)?)
                }
            }
            1 => {
                // d/du (1+u^2)^{(1-sigma)/2} = (1-sigma) u (1+u^2)^{-(1+sigma)/2}
                let a = (1.0 - self.sigma) / 2.0;
                let l = (u * u).ln_1p();
                let prim = if (a * l).abs() < 1e-8 {
                    0.5 * l * (1.0 + 0.5 * a * l)
                } else {
                    (a * l).exp_m1() / (2.0 * a)
                };
                Some(prim / self.normalizer)
            }
            _ => None,
        }
    }

    fn label(&self) -> String {
        format!("poisson(n = {}, sigma = {})", self.n, self.sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sig(v: f64) -> SigmaOrder {
        SigmaOrder::new(v).unwrap()
    }

    #[test]
    fn cauchy_normalizer() {
        assert!((poisson_normalizer(1, sig(1.0)).unwrap() - PI).abs() < 1e-12);
        assert!((poisson_normalizer(3, sig(1.0)).unwrap() - PI * PI).abs() < 1e-11);
    }

    #[test]
    fn cauchy_tail_and_moment() {
        let p = PoissonProfile::new(1, sig(1.0)).unwrap();
        // two-sided mass beyond 1 is 1 - (2/pi) arctan 1
        assert!((p.outer_mass(1.0).unwrap() - 0.5).abs() < 1e-13);
        assert!((p.radial_integral(0, 3.0).unwrap() - 3f64.atan() / PI).abs() < 1e-13);
        assert!((p.radial_integral(0, 0.5).unwrap() - 0.5f64.atan() / PI).abs() < 1e-13);
        let m = p.radial_integral(1, 2.0).unwrap();
        assert!((m - 0.5 * 5f64.ln() / PI).abs() < 1e-13);
    }

    #[test]
    fn eval_matches_scaled_form() {
        let p = PoissonProfile::new(2, sig(0.7)).unwrap();
        for &r in &[0.0, 0.3, 4.0] {
            assert!((p.eval(r) - p.at_scale(1.0, r * r)).abs() < 1e-15);
        }
    }
}
