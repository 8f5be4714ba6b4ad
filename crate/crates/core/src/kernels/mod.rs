//! Radial density profiles: Cauchy-Poisson, one-dimensional Lévy stable,
//! Gaussian, their mollifications, and tail coefficients.

mod gaussian;
mod levy;
mod poisson;

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{self, QuadOptions};
use crate::special::{gamma, omega};

pub use gaussian::GaussianProfile;
pub use levy::{
    levy_at_origin, levy_derivative_1d, levy_half_tail, levy_phi3_scaled, levy_profile_1d,
    levy_tail_series, LevyDirect, LevyOptions, LevyTable,
};
pub use poisson::{poisson_eval, poisson_normalizer, poisson_radial_tail, PoissonProfile};

/// Stability order, strictly inside `(0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SigmaOrder(f64);

impl SigmaOrder {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 2.0 {
            Ok(Self(value))
        } else {
            Err(invalid(
                "sigma",
                value,
                "stability order must lie in (0, 2)",
            ))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SigmaOrder {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SigmaOrder> for f64 {
    fn from(s: SigmaOrder) -> f64 {
        s.0
    }
}

impl fmt::Display for SigmaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Positive length scale (the mollification parameter).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Scale(f64);

impl Scale {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(invalid("y", value, "scale must be positive and finite"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Scale {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Scale> for f64 {
    fn from(s: Scale) -> f64 {
        s.0
    }
}

/// A radial density `x -> g(|x|)` on R^n.
///
/// `eval` never fails; profiles whose evaluation can fail (direct Lévy
/// quadrature) return NaN, which downstream consumers treat as an error.
pub trait RadialProfile: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, rho: f64) -> f64;
    fn is_decreasing(&self) -> bool;

    fn total_mass_hint(&self) -> Option<f64> {
        None
    }

    /// Radius on which the profile changes appreciably. Used to place
    /// quadrature breakpoints.
    fn length_scale(&self) -> f64 {
        1.0
    }

    /// Mass outside the ball of radius `r`, if known without generic quadrature.
    fn outer_mass(&self, _r: f64) -> Option<f64> {
        None
    }

    /// `int_0^u rho^k g(rho) d rho` for `k` in {0, 1}, if known without generic
    /// quadrature. Only meaningful for `dim() == 1`.
    fn radial_integral(&self, _k: u32, _u: f64) -> Option<f64> {
        None
    }

    fn label(&self) -> String;
}

impl<P: RadialProfile + ?Sized> RadialProfile for Arc<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, rho: f64) -> f64 {
        (**self).eval(rho)
    }
    fn is_decreasing(&self) -> bool {
        (**self).is_decreasing()
    }
    fn total_mass_hint(&self) -> Option<f64> {
        (**self).total_mass_hint()
    }
    fn length_scale(&self) -> f64 {
        (**self).length_scale()
    }
    fn outer_mass(&self, r: f64) -> Option<f64> {
        (**self).outer_mass(r)
    }
    fn radial_integral(&self, k: u32, u: f64) -> Option<f64> {
        (**self).radial_integral(k, u)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

pub type SharedProfile = Arc<dyn RadialProfile>;

/// `rho -> y^{-n} g(rho / y)`.
#[derive(Clone)]
pub struct Mollified {
    inner: SharedProfile,
    y: f64,
}

impl Mollified {
    pub fn inner(&self) -> &SharedProfile {
        &self.inner
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

pub fn mollify(profile: SharedProfile, y: f64) -> Result<Mollified> {
    let y = Scale::new(y)?.get();
    Ok(Mollified { inner: profile, y })
}

impl RadialProfile for Mollified {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, rho: f64) -> f64 {
        self.y.powi(-(self.dim() as i32)) * self.inner.eval(rho / self.y)
    }
    fn is_decreasing(&self) -> bool {
        self.inner.is_decreasing()
    }
    fn total_mass_hint(&self) -> Option<f64> {
        self.inner.total_mass_hint()
    }
    fn length_scale(&self) -> f64 {
        self.y * self.inner.length_scale()
    }
    fn outer_mass(&self, r: f64) -> Option<f64> {
        self.inner.outer_mass(r / self.y)
    }
    fn radial_integral(&self, k: u32, u: f64) -> Option<f64> {
        let power = k as i32 + 1 - self.dim() as i32;
        self.inner
            .radial_integral(k, u / self.y)
            .map(|v| v * self.y.powi(power))
    }
    fn label(&self) -> String {
        format!("{} (y = {})", self.inner.label(), self.y)
    }
}

/// A profile defined by a closure, for synthetic test kernels.
pub struct FnProfile<F> {
    dim: usize,
    decreasing: bool,
    scale: f64,
    label: String,
    f: F,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnProfile<F> {
    pub fn new(dim: usize, decreasing: bool, label: impl Into<String>, f: F) -> Self {
        Self {
            dim,
            decreasing,
            scale: 1.0,
            label: label.into(),
            f,
        }
    }

    pub fn with_length_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> RadialProfile for FnProfile<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, rho: f64) -> f64 {
        (self.f)(rho)
    }
    fn is_decreasing(&self) -> bool {
        self.decreasing
    }
    fn length_scale(&self) -> f64 {
        self.scale
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

fn radial_weight(n: usize, rho: f64) -> f64 {
    if n == 1 {
        1.0
    } else {
        rho.powi(n as i32 - 1)
    }
}

/// `omega_n int_a^b g(rho) rho^{n-1} d rho` by adaptive quadrature with
/// breakpoints at decades of the profile's length scale.
pub fn shell_mass(profile: &dyn RadialProfile, a: f64, b: f64, opts: &QuadOptions) -> Result<f64> {
    let n = profile.dim();
    let breaks = quad::geometric_breaks(a, b, profile.length_scale());
    let r = quad::integrate_with_breaks(
        |rho| profile.eval(rho) * radial_weight(n, rho),
        &breaks,
        opts,
    )?;
    if !r.value.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            value: r.value,
            error: r.error,
            evaluations: r.evaluations,
        });
    }
    Ok(omega(n) * r.value)
}

/// Mass of the profile outside the ball of radius `r`.
pub fn outer_mass(profile: &dyn RadialProfile, r: f64, opts: &QuadOptions) -> Result<f64> {
    if let Some(m) = profile.outer_mass(r) {
        return Ok(m);
    }
    let n = profile.dim();
    let far = (1e3 * profile.length_scale()).max(r);
    let near = if far > r {
        shell_mass(profile, r, far, opts)?
    } else {
        0.0
    };
    let tail =
        quad::integrate_to_infinity(|rho| profile.eval(rho) * radial_weight(n, rho), far, opts)?;
    Ok(near + omega(n) * tail.value)
}

/// Total mass `int_{R^n} g(|x|) dx`.
pub fn radial_mass(profile: &dyn RadialProfile, opts: &QuadOptions) -> Result<f64> {
    let r = 1e2 * profile.length_scale();
    Ok(shell_mass(profile, 0.0, r, opts)? + outer_mass(profile, r, opts)?)
}

/// One-dimensional half-line integral `int_0^u rho^k g(rho) d rho`, through
/// the profile's closed form when present and quadrature otherwise.
pub fn half_line_integral(
    profile: &dyn RadialProfile,
    k: u32,
    u: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    if profile.dim() != 1 {
        return Err(Error::Dimension(format!(
            "half-line integrals need a one-dimensional profile, got n = {}",
            profile.dim()
        )));
    }
    if u <= 0.0 {
        return Ok(0.0);
    }
    if let Some(v) = profile.radial_integral(k, u) {
        return Ok(v);
    }
    let breaks = quad::geometric_breaks(0.0, u, profile.length_scale());
    let r =
        quad::integrate_with_breaks(|rho| profile.eval(rho) * rho.powi(k as i32), &breaks, opts)?;
    Ok(r.value)
}

/// `int_u^inf g(rho) d rho` for a one-dimensional profile.
pub fn half_line_tail(profile: &dyn RadialProfile, u: f64, opts: &QuadOptions) -> Result<f64> {
    if profile.dim() != 1 {
        return Err(Error::Dimension(format!(
            "half-line tails need a one-dimensional profile, got n = {}",
            profile.dim()
        )));
    }
    Ok(0.5 * outer_mass(profile, u.max(0.0), opts)?)
}

/// Spot-check of nonnegativity and, when flagged, monotonicity on a sample grid.
pub fn check_profile(profile: &dyn RadialProfile, rhos: &[f64], tol: f64) -> Result<()> {
    let mut prev: Option<f64> = None;
    for &rho in rhos {
        let v = profile.eval(rho);
        if !v.is_finite() {
            return Err(invalid("rho", rho, "profile evaluation failed"));
        }
        if v < -tol {
            return Err(Error::NegativeDensity { rho, value: v });
        }
        if profile.is_decreasing() {
            if let Some(p) = prev {
                if v > p + tol * p.abs().max(1.0) {
                    return Err(invalid(
                        "rho",
                        rho,
                        format!("profile flagged decreasing but rises from {p:e} to {v:e}"),
                    ));
                }
            }
        }
        prev = Some(v);
    }
    Ok(())
}

/// Estimate of a tail limit `lim rho^{n+sigma} g(rho)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCoefficient {
    pub sigma: f64,
    pub value: f64,
    pub probe_radius: f64,
    pub residual: f64,
}

/// Increasing probe radii for [`tail_coefficient`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSchedule {
    radii: Vec<f64>,
}

impl ProbeSchedule {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 3 {
            return Err(Error::Precondition(
                "probe schedule needs at least three radii".into(),
            ));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(
                "probe radii must be positive and increasing".into(),
            ));
        }
        Ok(Self { radii })
    }

    /// Radii `last / 2^k` for `k = count - 1, ..., 0`.
    pub fn doubling_to(last: f64, count: usize) -> Result<Self> {
        let radii = (0..count)
            .rev()
            .map(|k| last / 2f64.powi(k as i32))
            .collect();
        Self::new(radii)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// Largest final log-slope of `rho^{n+sigma} g` still read as convergence.
const STABLE_SLOPE_LIMIT: f64 = 0.1;

/// Estimates `lim rho^{n+sigma} g(rho)` along the schedule, extrapolating
/// each consecutive pair `(rho, 2 rho)` under an `O(rho^-2)` error model.
/// The result is exact for the Poisson family up to `O(rho^-4)`.
pub fn tail_coefficient(
    profile: &dyn RadialProfile,
    sigma: SigmaOrder,
    probe: &ProbeSchedule,
) -> Result<TailCoefficient> {
    let s = sigma.get();
    let expo = profile.dim() as f64 + s;
    let radii = probe.radii();
    let mut q = Vec::with_capacity(radii.len());
    for &rho in radii {
        let v = profile.eval(rho);
        if !v.is_finite() {
            return Err(invalid(
                "rho",
                rho,
                "profile evaluation failed at probe radius",
            ));
        }
        q.push(rho.powf(expo) * v);
    }
    let m = q.len();
    let (q1, q2) = (q[m - 2], q[m - 1]);
    let not_stable = |detail: String| Error::NotStable { sigma: s, detail };
    if q1 <= 0.0 || q2 <= 0.0 {
        return Err(not_stable(format!(
            "rho^(n+sigma) g vanishes at the probe radii ({q1:e}, {q2:e})"
        )));
    }
    let slope = (q2 / q1).ln() / (radii[m - 1] / radii[m - 2]).ln();
    if slope.abs() > STABLE_SLOPE_LIMIT {
        let trend = if slope > 0.0 {
            "diverges"
        } else {
            "decays to zero"
        };
        return Err(not_stable(format!(
            "rho^(n+sigma) g {trend} along the schedule: final log-slope {slope:.3}, last values {q1:e} -> {q2:e}"
        )));
    }
    let extrapolate = |i: usize| {
        let r = radii[i + 1] / radii[i];
        let w = r * r;
        (w * q[i + 1] - q[i]) / (w - 1.0)
    };
    let last = extrapolate(m - 2);
    let prev = extrapolate(m - 3);
    Ok(TailCoefficient {
        sigma: s,
        value: last.max(0.0),
        probe_radius: radii[m - 1],
        residual: (last - prev).abs(),
    })
}

/// Closed-form limit of `rho^{1+sigma} v(rho)` for the one-dimensional Lévy
/// density `v`.
pub fn bg_coefficient(sigma: SigmaOrder) -> f64 {
    let s = sigma.get();
    s * 2f64.powf(s - 1.0)
        * PI.powf(-1.5)
        * (s * PI / 2.0).sin()
        * gamma((1.0 + s) / 2.0)
        * gamma(s / 2.0)
}

/// Writes `(rho, value)` rows.
pub fn write_profile_csv<W: Write>(
    profile: &dyn RadialProfile,
    rhos: &[f64],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rho", "value"])?;
    for &rho in rhos {
        w.write_record([rho.to_string(), profile.eval(rho).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `count` log-spaced points on `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
