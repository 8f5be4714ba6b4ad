//! The one-dimensional symmetric stable density
//! `v(rho) = (1/pi) int_0^inf exp(-t^sigma) cos(rho t) dt`, evaluated in the
//! scaled variable `s = rho t` by summing half-period lobes of `cos s`.

use std::f64::consts::PI;

use super::RadialProfile;
use crate::error::{invalid, Error, Result};
use crate::quad::{self, fourier_half_line, OscillatoryOptions, Trig};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy)]
pub struct LevyOptions {
    /// Admissible quadrature range for sigma; 2 is always admitted.
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Relative accuracy target for a single evaluation.
    pub rel_tol: f64,
    /// Largest negative value accepted as rounding noise.
    pub negativity_tol: f64,
    pub max_lobes: usize,
}

impl Default for LevyOptions {
    fn default() -> Self {
        Self {
            sigma_min: 0.05,
            sigma_max: 1.95,
            rel_tol: 1e-12,
            negativity_tol: 1e-12,
            max_lobes: 20_000,
        }
    }
}

fn check_sigma(sigma: f64, opts: &LevyOptions) -> Result<f64> {
    if sigma == 2.0 || (sigma >= opts.sigma_min && sigma <= opts.sigma_max) {
        Ok(sigma)
    } else {
        Err(invalid(
            "sigma",
            sigma,
            format!(
                "Lévy quadrature accepts sigma in [{}, {}] or sigma = 2",
                opts.sigma_min, opts.sigma_max
            ),
        ))
    }
}

/// Panel edges for the first lobe: decades of `s / rho` over which the
/// envelope `exp(-(s/rho)^sigma)` goes from flat to negligible.
fn envelope_breaks(rho: f64, sigma: f64) -> Vec<f64> {
    let lo = (-3.0 / sigma / std::f64::consts::LN_10).floor() as i32;
    let hi = (1.6 / sigma / std::f64::consts::LN_10).ceil() as i32 + 1;
    (lo..=hi)
        .map(|k| rho * 10f64.powi(k))
        .filter(|&b| b > 0.0 && b < PI / 2.0)
        .collect()
}

fn osc_options(abs_scale: f64, opts: &LevyOptions) -> OscillatoryOptions {
    let abs = 1e-15 * abs_scale.min(1.0);
    OscillatoryOptions {
        lobe_abs_tol: 1e-3 * abs,
        lobe_rel_tol: 1e-13,
        sum_abs_tol: abs,
        sum_rel_tol: opts.rel_tol,
        min_lobes: 8,
        max_lobes: opts.max_lobes,
        window: 30,
    }
}

/// `v(0) = Gamma(1 + 1/sigma) / pi`.
pub fn levy_at_origin(sigma: f64) -> f64 {
    (ln_gamma(1.0 + 1.0 / sigma)).exp() / PI
}

/// The density `v(rho, 1; sigma)`; `sigma = 2` gives `exp(-rho^2/4) / (2 sqrt pi)`.
pub fn levy_profile_1d(sigma: f64, rho: f64, opts: &LevyOptions) -> Result<f64> {
    let sigma = check_sigma(sigma, opts)?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(invalid("rho", rho, "radius must be finite and nonnegative"));
    }
    let v0 = levy_at_origin(sigma);
    if rho == 0.0 {
        return Ok(v0);
    }
    let g = |s: f64| (-(s / rho).powf(sigma)).exp();
    let r = fourier_half_line(
        g,
        Trig::Cos,
        g,
        &envelope_breaks(rho, sigma),
        &osc_options(PI * rho * v0, opts),
    )?;
    let v = r.value / (PI * rho);
    let noise = opts.negativity_tol.max(10.0 * r.error / (PI * rho));
    if v < -noise {
        return Err(Error::NegativeDensity { rho, value: v });
    }
    Ok(v.max(0.0))
}

/// `v'(rho) = -(1/pi) int_0^inf t exp(-t^sigma) sin(rho t) dt`.
pub fn levy_derivative_1d(sigma: f64, rho: f64, opts: &LevyOptions) -> Result<f64> {
    let sigma = check_sigma(sigma, opts)?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(invalid("rho", rho, "radius must be finite and nonnegative"));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let j = weighted_sine_integral(sigma, rho, opts)?;
    Ok(-j / (PI * rho * rho))
}

/// `int_0^inf s exp(-(s/rho)^sigma) sin s ds`.
fn weighted_sine_integral(sigma: f64, rho: f64, opts: &LevyOptions) -> Result<f64> {
    let g = |s: f64| s * (-(s / rho).powf(sigma)).exp();
    let peak = rho * sigma.powf(-1.0 / sigma);
    let envelope = |s: f64| g(s.max(peak));
    // Near the origin the integral behaves like pi rho^3 |v''(0)|.
    let ln_mag = 3.0 * rho.ln() + ln_gamma(3.0 / sigma) - sigma.ln();
    let r = fourier_half_line(
        g,
        Trig::Sin,
        envelope,
        &envelope_breaks(rho, sigma),
        &osc_options(ln_mag.min(0.0).exp(), opts),
    )?;
    Ok(r.value)
}

/// `rho^3 Phi^3_sigma(rho)`, where `Phi^3` is the radial stable density in
/// three dimensions: `(1 / (2 pi^2)) int_0^inf s exp(-(s/rho)^sigma) sin s ds`.
pub fn levy_phi3_scaled(sigma: f64, rho: f64, opts: &LevyOptions) -> Result<f64> {
    let sigma = check_sigma(sigma, opts)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(invalid("rho", rho, "radius must be finite and positive"));
    }
    Ok(weighted_sine_integral(sigma, rho, opts)? / (2.0 * PI * PI))
}

/// `int_r^inf v(rho) d rho = 1/2 - (1/pi) int_0^inf exp(-(s/r)^sigma) sin(s) / s ds`.
pub fn levy_half_tail(sigma: f64, r: f64, opts: &LevyOptions) -> Result<f64> {
    let sigma = check_sigma(sigma, opts)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid("r", r, "radius must be finite and nonnegative"));
    }
    if r == 0.0 {
        return Ok(0.5);
    }
    let g = |s: f64| (-(s / r).powf(sigma)).exp() / s;
    let oscillatory = fourier_half_line(
        g,
        Trig::Sin,
        |s: f64| if s < 1.0 { 1.0 } else { g(s) },
        &envelope_breaks(r, sigma),
        &osc_options(1.0, opts),
    )?;
    Ok((0.5 - oscillatory.value / PI).max(0.0))
}

/// Coefficients `c_k` of the large-`rho` expansion
/// `v(rho) ~ sum_k c_k rho^{-k sigma - 1}`, with the magnitudes
/// `Gamma(k sigma + 1) / (k! pi)` that bound them.
fn tail_coefficients(sigma: f64, terms: usize) -> (Vec<f64>, Vec<f64>) {
    (1..=terms)
        .map(|k| {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let mag = (ln_gamma(kf * sigma + 1.0) - ln_gamma(kf + 1.0)).exp() / PI;
            (sign * mag * (kf * PI * sigma / 2.0).sin(), mag)
        })
        .unzip()
}

/// Large-`rho` series for `v`, truncated before its smallest term. Returns
/// the sum and the magnitude of the first omitted term. Convergent for
/// `sigma < 1`, asymptotic for `sigma > 1`.
pub fn levy_tail_series(sigma: f64, rho: f64, max_terms: usize) -> (f64, f64) {
    let (c, mag) = tail_coefficients(sigma, max_terms);
    let (sum, omitted, _) = sum_to_smallest(&c, &mag, sigma, rho);
    (sum, omitted)
}

/// Sums `c_k rho^{-k sigma - 1}` up to the smallest-magnitude term.
/// Growth is judged on the magnitude envelope, since individual
/// coefficients vanish whenever `k sigma` is an even integer.
/// Returns (sum, first omitted magnitude, number of terms used).
fn sum_to_smallest(c: &[f64], mag: &[f64], sigma: f64, rho: f64) -> (f64, f64, usize) {
    let x = rho.powf(-sigma);
    let mut sum = 0.0;
    let mut p = x / rho;
    let mut best = f64::INFINITY;
    let mut used = 0;
    for (i, &ck) in c.iter().enumerate() {
        let env = mag[i] * p;
        if env > best {
            return (sum, env, used);
        }
        best = env;
        sum += ck * p;
        used = i + 1;
        p *= x;
    }
    (sum, best, used)
}

/// Evaluator calling [`levy_profile_1d`] on every query; failures show up
/// as NaN.
#[derive(Debug, Clone, Copy)]
pub struct LevyDirect {
    sigma: f64,
    opts: LevyOptions,
}

impl LevyDirect {
    pub fn new(sigma: f64, opts: LevyOptions) -> Result<Self> {
        check_sigma(sigma, &opts)?;
        Ok(Self { sigma, opts })
    }
}

impl RadialProfile for LevyDirect {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, rho: f64) -> f64 {
        levy_profile_1d(self.sigma, rho, &self.opts).unwrap_or(f64::NAN)
    }
    fn is_decreasing(&self) -> bool {
        true
    }
    fn total_mass_hint(&self) -> Option<f64> {
        Some(1.0)
    }
    fn outer_mass(&self, r: f64) -> Option<f64> {
        levy_half_tail(self.sigma, r, &self.opts)
            .ok()
            .map(|t| 2.0 * t)
    }
    fn label(&self) -> String {
        format!("levy-direct(sigma = {})", self.sigma)
    }
}

const POINTS_PER_DECADE: f64 = 80.0;
const MAX_SERIES_TERMS: usize = 80;

/// Precomputed Lévy profile: cubic Hermite interpolation of `ln v` against
/// `ln rho` between a Taylor core near the origin and the large-`rho`
/// series. Cumulative integrals of `v` and `rho v` are stored per node so
/// that half-line integrals are cheap.
#[derive(Debug, Clone)]
pub struct LevyTable {
    sigma: f64,
    v0: f64,
    c2: f64,
    rho_min: f64,
    rho_max: f64,
    ln_rho0: f64,
    step: f64,
    ln_v: Vec<f64>,
    slope: Vec<f64>,
    cum0: Vec<f64>,
    cum1: Vec<f64>,
    series: Vec<f64>,
    tail0: f64,
}

impl LevyTable {
    pub fn new(sigma: f64, opts: &LevyOptions) -> Result<Self> {
        check_sigma(sigma, opts)?;
        if sigma >= 2.0 {
            return Err(invalid(
                "sigma",
                sigma,
                "the tabulated profile needs a heavy tail; use the Gaussian profile",
            ));
        }
        let v0 = levy_at_origin(sigma);
        let c2 = -(ln_gamma(3.0 / sigma)).exp() / (2.0 * PI * sigma);
        // Next Taylor term Gamma(5/sigma)/(24 pi sigma) rho^4 relative to v0 below 1e-10.
        let ln_ratio = ln_gamma(5.0 / sigma) - ln_gamma(1.0 / sigma) - 24f64.ln();
        let rho_min = (0.25 * ((1e-10f64).ln() - ln_ratio).min(0.0)).exp();

        let (coeffs, mags) = tail_coefficients(sigma, MAX_SERIES_TERMS);
        let (rho_max, terms) = Self::series_start(sigma, &coeffs, &mags, opts)?;
        let series = coeffs[..terms].to_vec();

        let ln_rho0 = rho_min.ln();
        let decades = (rho_max / rho_min).log10();
        let nodes = ((decades * POINTS_PER_DECADE).ceil() as usize).max(8) + 1;
        let step = (rho_max.ln() - ln_rho0) / (nodes - 1) as f64;

        use rayon::prelude::*;
        let samples: Vec<(f64, f64)> = (0..nodes)
            .into_par_iter()
            .map(|i| {
                let rho = (ln_rho0 + step * i as f64).exp();
                let v = levy_profile_1d(sigma, rho, opts)?;
                let dv = levy_derivative_1d(sigma, rho, opts)?;
                if v <= 0.0 {
                    return Err(Error::NegativeDensity { rho, value: v });
                }
                Ok((v.ln(), rho * dv / v))
            })
            .collect::<Result<_>>()?;
        let (ln_v, slope): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();

        let mut table = Self {
            sigma,
            v0,
            c2,
            rho_min,
            rho_max,
            ln_rho0,
            step,
            ln_v,
            slope,
            cum0: Vec::new(),
            cum1: Vec::new(),
            series,
            tail0: 0.0,
        };
        table.accumulate();
        table.tail0 = table.series_half_tail(rho_max);
        Ok(table)
    }

    /// Smallest radius `2^j` where the series agrees with direct quadrature
    /// to 1e-10 and its first omitted term is below 1e-12 relative.
    fn series_start(
        sigma: f64,
        coeffs: &[f64],
        mags: &[f64],
        opts: &LevyOptions,
    ) -> Result<(f64, usize)> {
        let mut rho = 4.0;
        while rho <= 1e8 {
            let (s, omitted, used) = sum_to_smallest(coeffs, mags, sigma, rho);
            if s > 0.0 && omitted <= 1e-13 * s {
                let direct = levy_profile_1d(sigma, rho, opts)?;
                if ((s - direct) / direct).abs() <= 1e-10 {
                    return Ok((rho, used));
                }
            }
            rho *= 2.0;
        }
        Err(Error::Precondition(format!(
            "no radius up to 1e8 where the tail series of the sigma = {sigma} profile is accurate"
        )))
    }

    fn accumulate(&mut self) {
        let n = self.ln_v.len();
        let rm = self.rho_min;
        let mut c0 = self.v0 * rm + self.c2 * rm.powi(3) / 3.0;
        let mut c1 = self.v0 * rm * rm / 2.0 + self.c2 * rm.powi(4) / 4.0;
        self.cum0 = Vec::with_capacity(n);
        self.cum1 = Vec::with_capacity(n);
        self.cum0.push(c0);
        self.cum1.push(c1);
        for i in 0..n - 1 {
            let a = self.node(i);
            let b = self.node(i + 1);
            c0 += quad::gk15(&|r| self.interp(r), a, b).0;
            c1 += quad::gk15(&|r| r * self.interp(r), a, b).0;
            self.cum0.push(c0);
            self.cum1.push(c1);
        }
    }

    fn node(&self, i: usize) -> f64 {
        if i == self.ln_v.len() - 1 {
            self.rho_max
        } else {
            (self.ln_rho0 + self.step * i as f64).exp()
        }
    }

    fn cell(&self, rho: f64) -> usize {
        let t = (rho.ln() - self.ln_rho0) / self.step;
        (t.floor().max(0.0) as usize).min(self.ln_v.len() - 2)
    }

    fn interp(&self, rho: f64) -> f64 {
        let i = self.cell(rho);
        let t = ((rho.ln() - self.ln_rho0) / self.step - i as f64).clamp(0.0, 1.0);
        let (y0, y1) = (self.ln_v[i], self.ln_v[i + 1]);
        let (m0, m1) = (self.slope[i] * self.step, self.slope[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        (h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1).exp()
    }

    fn series_value(&self, rho: f64) -> f64 {
        let x = rho.powf(-self.sigma);
        let mut p = x / rho;
        let mut sum = 0.0;
        for &c in &self.series {
            sum += c * p;
            p *= x;
        }
        sum
    }

    /// `int_r^inf v` from the series, valid for `r >= rho_max`.
    fn series_half_tail(&self, r: f64) -> f64 {
        let x = r.powf(-self.sigma);
        let mut p = x;
        let mut sum = 0.0;
        for (k, &c) in self.series.iter().enumerate() {
            sum += c * p / ((k + 1) as f64 * self.sigma);
            p *= x;
        }
        sum
    }

    /// `int_a^b rho v` from the series, for `rho_max <= a <= b`.
    fn series_moment(&self, a: f64, b: f64) -> f64 {
        let mut sum = 0.0;
        for (k, &c) in self.series.iter().enumerate() {
            let e = 1.0 - (k + 1) as f64 * self.sigma;
            sum += c * if e.abs() < 1e-12 {
                (b / a).ln()
            } else {
                (b.powf(e) - a.powf(e)) / e
            };
        }
        sum
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Range `[rho_min, rho_max]` covered by interpolation.
    pub fn table_range(&self) -> (f64, f64) {
        (self.rho_min, self.rho_max)
    }

    pub fn len(&self) -> usize {
        self.ln_v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_v.is_empty()
    }

    /// `int_r^inf v` for any `r >= 0`.
    pub fn half_tail(&self, r: f64) -> f64 {
        if r >= self.rho_max {
            self.series_half_tail(r)
        } else {
            let last = *self.cum0.last().expect("table has nodes");
            self.tail0 + (last - self.half_integral(0, r))
        }
    }

    fn half_integral(&self, k: u32, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u <= self.rho_min {
            return match k {
                0 => self.v0 * u + self.c2 * u.powi(3) / 3.0,
                _ => self.v0 * u * u / 2.0 + self.c2 * u.powi(4) / 4.0,
            };
        }
        let cum = if k == 0 { &self.cum0 } else { &self.cum1 };
        if u >= self.rho_max {
            let last = *cum.last().expect("table has nodes");
            return match k {
                0 => last + (self.tail0 - self.series_half_tail(u)),
                _ => last + self.series_moment(self.rho_max, u),
            };
        }
        let i = self.cell(u);
        let a = self.node(i);
        let part = if k == 0 {
            quad::gk15(&|r| self.interp(r), a, u).0
        } else {
            quad::gk15(&|r| r * self.interp(r), a, u).0
        };
        cum[i] + part
    }
}

impl RadialProfile for LevyTable {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        if rho <= self.rho_min {
            self.v0 + self.c2 * rho * rho
        } else if rho >= self.rho_max {
            self.series_value(rho)
        } else {
            self.interp(rho)
        }
    }

    fn is_decreasing(&self) -> bool {
        true
    }

    fn total_mass_hint(&self) -> Option<f64> {
        Some(1.0)
    }

    fn outer_mass(&self, r: f64) -> Option<f64> {
        Some(2.0 * self.half_tail(r))
    }

    fn radial_integral(&self, k: u32, u: f64) -> Option<f64> {
        (k <= 1).then(|| self.half_integral(k, u))
    }

    fn label(&self) -> String {
        format!("levy(sigma = {})", self.sigma)
    }
}
