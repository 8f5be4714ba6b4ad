//! Harnack inequalities on balls and annuli, checked by brute-force sampling,
//! and the ball-averaged regularization of a kernel.
//!
//! A certificate that passes only says the inequality was not refuted at the
//! recorded sampling density. The conditions quantify over continua, so a
//! sampled check can refute but never prove them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hom_space::{FiniteHomSpace, KernelMatrix};
use crate::kernels::{RadialProfile, SharedProfile, SigmaOrder};
use crate::quad::{self, QuadOptions};

/// A kernel `K(x, z)` on R^n.
pub trait PointKernel: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], z: &[f64]) -> f64;

    /// Quadrature tolerance within which `int K(x, z) dz` should be one.
    fn markov_tol(&self) -> f64 {
        1e-6
    }

    /// The radial profile, for convolution kernels.
    fn as_radial(&self) -> Option<&dyn RadialProfile> {
        None
    }

    fn label(&self) -> String;
}

/// The convolution kernel `K(x, z) = g(|x - z|)` of a radial profile.
#[derive(Clone)]
pub struct RadialKernel {
    profile: SharedProfile,
}

impl RadialKernel {
    pub fn new(profile: SharedProfile) -> Self {
        Self { profile }
    }

    pub fn profile(&self) -> &SharedProfile {
        &self.profile
    }
}

pub(crate) fn distance(x: &[f64], z: &[f64]) -> f64 {
    x.iter()
        .zip(z)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

impl PointKernel for RadialKernel {
    fn dim(&self) -> usize {
        self.profile.dim()
    }
    fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        self.profile.eval(distance(x, z))
    }
    fn as_radial(&self) -> Option<&dyn RadialProfile> {
        Some(self.profile.as_ref())
    }
    fn label(&self) -> String {
        self.profile.label()
    }
}

/// A kernel given by a closure, for synthetic and non-convolution kernels.
pub struct FnKernel<F> {
    dim: usize,
    label: String,
    f: F,
}

impl<F: Fn(&[f64], &[f64]) -> f64 + Send + Sync> FnKernel<F> {
    pub fn new(dim: usize, label: impl Into<String>, f: F) -> Self {
        Self {
            dim,
            label: label.into(),
            f,
        }
    }
}

impl<F: Fn(&[f64], &[f64]) -> f64 + Send + Sync> PointKernel for FnKernel<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        (self.f)(x, z)
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Exact sup/inf ratio of the Poisson kernel over balls `B(xi, gamma |x - xi|)`
/// at `t = |x - xi| / y`.
pub fn poisson_harnack_ratio(n: usize, sigma: SigmaOrder, gamma: f64, t: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(t > 0.0) {
        return Err(invalid("t", t, "ratio |x|/y must be positive"));
    }
    let p = (n as f64 + sigma.get()) / 2.0;
    if t.is_infinite() {
        return Ok(((1.0 + gamma) / (1.0 - gamma)).powf(2.0 * p));
    }
    let a = (1.0 + gamma) * t;
    let b = (1.0 - gamma) * t;
    Ok(((1.0 + a * a) / (1.0 + b * b)).powf(p))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(invalid("gamma", gamma, "must lie in (0, 1)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingInfo {
    pub shape: String,
    pub regions: usize,
    pub points_per_region: usize,
    pub extremal_points: bool,
    /// Regions with no sample points (empty annuli on finite spaces).
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackCertificate {
    pub gamma: f64,
    #[serde(rename = "H", with = "crate::serde_float")]
    pub h: f64,
    pub passed: bool,
    #[serde(with = "crate::serde_float")]
    pub worst_ratio: f64,
    pub witness: Option<Witness>,
    pub sampling: SamplingInfo,
}

/// sup/inf of a sample of kernel values, with the conventions: all zero
/// counts as flat (ratio 1), a zero inf under a positive sup is infinite.
fn sup_inf_ratio(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    let mut any = false;
    for v in values {
        any = true;
        if v.is_nan() {
            return Some(f64::NAN);
        }
        sup = sup.max(v);
        inf = inf.min(v);
    }
    if !any {
        return None;
    }
    Some(if sup <= 0.0 {
        1.0
    } else if inf <= 0.0 {
        f64::INFINITY
    } else {
        sup / inf
    })
}

/// Reduction key: NaN ranks above everything so failures surface.
fn worse(a: f64, b: f64) -> bool {
    a.is_nan() && !b.is_nan() || (!b.is_nan() && a > b)
}

/// Pole/center pairs for ball certification on R^n: every pole `x` is
/// paired with centers `xi = x + d e` for each distance `d` and each of
/// `directions` unit vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSampling {
    pub poles: Vec<Vec<f64>>,
    pub distances: Vec<f64>,
    pub directions: usize,
    pub points_per_ball: usize,
    pub include_extremal: bool,
}

impl BallSampling {
    /// Pole at the origin, distances log-spaced on `[d_min, d_max]`, and the
    /// default density of 64 points per ball for n = 1 and 256 above.
    pub fn radial_sweep(n: usize, d_min: f64, d_max: f64, count: usize) -> Self {
        Self {
            poles: vec![vec![0.0; n]],
            distances: crate::kernels::log_space(d_min, d_max, count),
            directions: if n == 1 { 2 } else { 4 },
            points_per_ball: if n == 1 { 64 } else { 256 },
            include_extremal: true,
        }
    }
}

fn unit_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => [1.0, -1.0]
            .iter()
            .take(count.max(1))
            .map(|&s| vec![s])
            .collect(),
        2 => (0..count.max(1))
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count.max(1) as f64 + 0.1;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut dirs = Vec::new();
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; n];
                    e[i] = s;
                    dirs.push(e);
                }
            }
            dirs.truncate(count.max(1));
            dirs
        }
    }
}

/// Points filling the closed ball (or shell `[r_in, r]`) of radius `r` around
/// `c`, plus, when `toward` is given, the two points on the line through
/// `toward` at the inner and outer edges (where radial kernels peak and
/// bottom out).
fn region_points(
    c: &[f64],
    r_in: f64,
    r: f64,
    count: usize,
    toward: Option<&[f64]>,
) -> Vec<Vec<f64>> {
    let n = c.len();
    let mut pts = Vec::with_capacity(count + 4);
    match n {
        1 => {
            if r_in == 0.0 {
                for k in 0..count {
                    let t = -1.0 + 2.0 * k as f64 / (count - 1).max(1) as f64;
                    pts.push(vec![c[0] + r * t]);
                }
            } else {
                let half = (count / 2).max(2);
                for k in 0..half {
                    let rho = r_in + (r - r_in) * k as f64 / (half - 1) as f64;
                    pts.push(vec![c[0] + rho]);
                    pts.push(vec![c[0] - rho]);
                }
            }
        }
        _ => {
            // Polar (or spherical-coordinate) rings, area-weighted radii.
            let rings = ((count as f64).sqrt().ceil() as usize).max(2);
            let per_ring = (count / rings).max(4);
            for i in 0..rings {
                let u = (i as f64 + 0.5) / rings as f64;
                let rho = (r_in * r_in + u * (r * r - r_in * r_in)).sqrt();
                for j in 0..per_ring {
                    let a = 2.0 * std::f64::consts::PI * j as f64 / per_ring as f64;
                    let mut p = c.to_vec();
                    p[0] += rho * a.cos();
                    p[1] += rho * a.sin();
                    pts.push(p);
                }
            }
            // Boundary circles.
            for rho in [r_in, r] {
                if rho == 0.0 {
                    continue;
                }
                for j in 0..per_ring {
                    let a = 2.0 * std::f64::consts::PI * j as f64 / per_ring as f64;
                    let mut p = c.to_vec();
                    p[0] += rho * a.cos();
                    p[1] += rho * a.sin();
                    pts.push(p);
                }
            }
        }
    }
    if let Some(x) = toward {
        let d = distance(c, x);
        if d > 0.0 {
            let e: Vec<f64> = c.iter().zip(x).map(|(a, b)| (b - a) / d).collect();
            let at = |s: f64| {
                c.iter()
                    .zip(&e)
                    .map(|(a, u)| a + s * u)
                    .collect::<Vec<f64>>()
            };
            if r_in == 0.0 {
                pts.push(at(r));
                pts.push(at(-r));
            } else {
                for s in [r_in, -r_in, r, -r] {
                    pts.push(at(s));
                }
            }
        }
    }
    pts
}

/// Brute-force check of `sup_{B(xi, gamma|x-xi|)} K(x, .) <= H inf_{...} K(x, .)`.
pub fn certify_ball_harnack(
    kernel: &dyn PointKernel,
    gamma: f64,
    h: f64,
    sampling: &BallSampling,
) -> Result<HarnackCertificate> {
    check_gamma(gamma)?;
    let n = kernel.dim();
    if sampling.poles.iter().any(|p| p.len() != n) {
        return Err(Error::Dimension(format!(
            "sampling poles must have {n} coordinates"
        )));
    }
    let dirs = unit_directions(n, sampling.directions);
    let mut pairs = Vec::new();
    for x in &sampling.poles {
        for &d in &sampling.distances {
            if d <= 0.0 {
                continue;
            }
            for e in &dirs {
                let xi: Vec<f64> = x.iter().zip(e).map(|(a, u)| a + d * u).collect();
                pairs.push((x.clone(), xi, d));
            }
        }
    }
    let skipped = AtomicCount::default();
    let best = pairs
        .par_iter()
        .filter_map(|(x, xi, d)| {
            let r = gamma * d;
            let toward = sampling.include_extremal.then_some(x.as_slice());
            let pts = region_points(xi, 0.0, r, sampling.points_per_ball, toward);
            match sup_inf_ratio(pts.iter().map(|z| kernel.eval(x, z))) {
                Some(ratio) => Some((
                    ratio,
                    Witness {
                        x: x.clone(),
                        xi: xi.clone(),
                        r,
                    },
                )),
                None => {
                    skipped.bump();
                    None
                }
            }
        })
        .reduce_with(|a, b| if worse(b.0, a.0) { b } else { a });
    Ok(finish(
        gamma,
        h,
        best,
        SamplingInfo {
            shape: "ball".into(),
            regions: pairs.len(),
            points_per_region: sampling.points_per_ball,
            extremal_points: sampling.include_extremal,
            skipped: skipped.get(),
        },
    ))
}

fn finish(
    gamma: f64,
    h: f64,
    best: Option<(f64, Witness)>,
    sampling: SamplingInfo,
) -> HarnackCertificate {
    let (worst_ratio, witness) = match best {
        Some((r, w)) => (r, Some(w)),
        None => (1.0, None),
    };
    HarnackCertificate {
        gamma,
        h,
        passed: worst_ratio <= h,
        worst_ratio,
        witness,
        sampling,
    }
}

#[derive(Default)]
struct AtomicCount(std::sync::atomic::AtomicUsize);

impl AtomicCount {
    fn bump(&self) {
        self.0.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    }
    fn get(&self) -> usize {
        self.0.load(std::sync::atomic::Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub gamma: f64,
    pub sample_density: usize,
}

impl AnnulusSpec {
    pub fn new(gamma: f64, sample_density: usize) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self {
            gamma,
            sample_density,
        })
    }
}

/// Poles and outer radii for annulus certification on R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSampling {
    pub poles: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

/// Brute-force check of the Harnack inequality on annuli `A(x, gamma r, r)`
/// around the pole.
pub fn certify_annulus_harnack(
    kernel: &dyn PointKernel,
    spec: &AnnulusSpec,
    h: f64,
    sampling: &AnnulusSampling,
) -> Result<HarnackCertificate> {
    check_gamma(spec.gamma)?;
    let n = kernel.dim();
    let mut jobs = Vec::new();
    for x in &sampling.poles {
        if x.len() != n {
            return Err(Error::Dimension(format!(
                "sampling poles must have {n} coordinates"
            )));
        }
        for &r in &sampling.radii {
            jobs.push((x.clone(), r));
        }
    }
    let skipped = AtomicCount::default();
    let best = jobs
        .par_iter()
        .filter_map(|(x, r)| {
            let pts = region_points(x, spec.gamma * r, *r, spec.sample_density, None);
            match sup_inf_ratio(pts.iter().map(|z| kernel.eval(x, z))) {
                Some(ratio) => Some((
                    ratio,
                    Witness {
                        x: x.clone(),
                        xi: x.clone(),
                        r: *r,
                    },
                )),
                None => {
                    skipped.bump();
                    None
                }
            }
        })
        .reduce_with(|a, b| if worse(b.0, a.0) { b } else { a });
    Ok(finish(
        spec.gamma,
        h,
        best,
        SamplingInfo {
            shape: "annulus".into(),
            regions: jobs.len(),
            points_per_region: spec.sample_density,
            extremal_points: false,
            skipped: skipped.get(),
        },
    ))
}

/// Ball certification on a finite space over every pair `x != xi`, with the
/// open balls `{z : d(xi, z) < gamma d(x, xi)}`.
pub fn certify_ball_harnack_finite(
    space: &FiniteHomSpace,
    kernel: &KernelMatrix,
    gamma: f64,
    h: f64,
) -> Result<HarnackCertificate> {
    check_gamma(gamma)?;
    check_matrix(space, kernel)?;
    let m = space.len();
    let best = (0..m)
        .into_par_iter()
        .flat_map_iter(|x| (0..m).filter(move |&xi| xi != x).map(move |xi| (x, xi)))
        .filter_map(|(x, xi)| {
            let r = gamma * space.dist(x, xi);
            let ratio = sup_inf_ratio(space.ball(xi, r).map(|z| kernel.get(x, z)))?;
            Some((ratio, finite_witness(space, x, xi, r)))
        })
        .reduce_with(|a, b| if worse(b.0, a.0) { b } else { a });
    Ok(finish(
        gamma,
        h,
        best,
        SamplingInfo {
            shape: "ball".into(),
            regions: m * (m - 1),
            points_per_region: 0,
            extremal_points: false,
            skipped: 0,
        },
    ))
}

/// Annulus certification on a finite space over every point and every
/// radius of the schedule. Empty annuli are counted as skipped.
pub fn certify_annulus_harnack_finite(
    space: &FiniteHomSpace,
    kernel: &KernelMatrix,
    gamma: f64,
    h: f64,
    radii: &[f64],
) -> Result<HarnackCertificate> {
    check_gamma(gamma)?;
    check_matrix(space, kernel)?;
    let m = space.len();
    let skipped = AtomicCount::default();
    let best = (0..m)
        .into_par_iter()
        .flat_map_iter(|x| radii.iter().map(move |&r| (x, r)))
        .filter_map(|(x, r)| {
            let ring = (0..m).filter(|&z| {
                let d = space.dist(x, z);
                d >= gamma * r && d < r
            });
            match sup_inf_ratio(ring.map(|z| kernel.get(x, z))) {
                Some(ratio) => Some((ratio, finite_witness(space, x, x, r))),
                None => {
                    skipped.bump();
                    None
                }
            }
        })
        .reduce_with(|a, b| if worse(b.0, a.0) { b } else { a });
    Ok(finish(
        gamma,
        h,
        best,
        SamplingInfo {
            shape: "annulus".into(),
            regions: m * radii.len(),
            points_per_region: 0,
            extremal_points: false,
            skipped: skipped.get(),
        },
    ))
}

fn check_matrix(space: &FiniteHomSpace, kernel: &KernelMatrix) -> Result<()> {
    if kernel.len() != space.len() {
        return Err(Error::Dimension(format!(
            "kernel has {} points, space has {}",
            kernel.len(),
            space.len()
        )));
    }
    Ok(())
}

fn finite_witness(space: &FiniteHomSpace, x: usize, xi: usize, r: f64) -> Witness {
    Witness {
        x: space.coordinates(x),
        xi: space.coordinates(xi),
        r,
    }
}

/// The ball average `K~(x, y) = |B|^{-1} int_B K(x, z) dz` over
/// `B = B(y, gamma |x - y|)`, with `K~(x, x) = K(x, x)`.
pub struct Regularized<'a> {
    kernel: &'a dyn PointKernel,
    gamma: f64,
    opts: QuadOptions,
}

pub fn regularize(kernel: &dyn PointKernel, gamma: f64) -> Result<Regularized<'_>> {
    check_gamma(gamma)?;
    if kernel.dim() > 2 {
        return Err(Error::Dimension(
            "ball averages are implemented for n = 1 and n = 2".into(),
        ));
    }
    Ok(Regularized {
        kernel,
        gamma,
        opts: QuadOptions::with_tol(1e-13, 1e-10),
    })
}

impl Regularized<'_> {
    pub fn try_eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let d = distance(x, y);
        if d == 0.0 {
            return Ok(self.kernel.eval(x, y));
        }
        let r = self.gamma * d;
        match self.kernel.dim() {
            1 => {
                let q = quad::integrate(
                    |z| self.kernel.eval(x, &[z]),
                    y[0] - r,
                    y[0] + r,
                    &self.opts,
                )?;
                Ok(q.value / (2.0 * r))
            }
            _ => {
                let two_pi = 2.0 * std::f64::consts::PI;
                let inner = |rho: f64| -> Result<f64> {
                    let q = quad::integrate(
                        |a| {
                            self.kernel
                                .eval(x, &[y[0] + rho * a.cos(), y[1] + rho * a.sin()])
                        },
                        0.0,
                        two_pi,
                        &self.opts,
                    )?;
                    Ok(q.value * rho)
                };
                let failure = std::cell::Cell::new(None);
                let q = quad::integrate(
                    |rho| match inner(rho) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.set(Some(e.to_string()));
                            f64::NAN
                        }
                    },
                    0.0,
                    r,
                    &self.opts,
                );
                if let Some(msg) = failure.take() {
                    return Err(Error::Precondition(format!(
                        "inner ball-average quadrature failed: {msg}"
                    )));
                }
                Ok(q?.value / (std::f64::consts::PI * r * r))
            }
        }
    }
}

impl PointKernel for Regularized<'_> {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }
    fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        self.try_eval(x, z).unwrap_or(f64::NAN)
    }
    fn label(&self) -> String {
        format!(
            "regularized({}, gamma = {})",
            self.kernel.label(),
            self.gamma
        )
    }
}

/// `K~` on a finite space: `mu(B)^{-1} sum_{z in B} K(x, z) mu(z)` with
/// `B = B(y, gamma d(x, y))`.
pub fn regularize_finite(
    space: &FiniteHomSpace,
    kernel: &KernelMatrix,
    gamma: f64,
) -> Result<KernelMatrix> {
    check_gamma(gamma)?;
    check_matrix(space, kernel)?;
    let m = space.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|x| {
            (0..m)
                .map(|y| {
                    if x == y {
                        return Ok(kernel.get(x, x));
                    }
                    let r = gamma * space.dist(x, y);
                    let (mut num, mut den) = (0.0, 0.0);
                    for z in space.ball(y, r) {
                        num += kernel.get(x, z) * space.mass(z);
                        den += space.mass(z);
                    }
                    if den <= 0.0 {
                        return Err(Error::ZeroMeasureBall {
                            x,
                            y,
                            center: y,
                            radius: r,
                        });
                    }
                    Ok(num / den)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    KernelMatrix::from_rows(rows)
}

/// `(max K / K~, max K~ / K)` over the sample pairs.
pub fn sandwich_ratios(
    k: &dyn PointKernel,
    k_reg: &dyn PointKernel,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> (f64, f64) {
    pairs
        .par_iter()
        .map(|(x, z)| {
            let a = k.eval(x, z);
            let b = k_reg.eval(x, z);
            (a / b, b / a)
        })
        .reduce(|| (0.0, 0.0), |p, q| (p.0.max(q.0), p.1.max(q.1)))
}

/// Finite-space counterpart of [`sandwich_ratios`] over all pairs.
pub fn sandwich_ratios_finite(k: &KernelMatrix, k_reg: &KernelMatrix) -> (f64, f64) {
    let m = k.len();
    (0..m)
        .into_par_iter()
        .map(|x| {
            (0..m).fold((0.0f64, 0.0f64), |acc, y| {
                let a = k.get(x, y);
                let b = k_reg.get(x, y);
                (acc.0.max(a / b), acc.1.max(b / a))
            })
        })
        .reduce(|| (0.0, 0.0), |p, q| (p.0.max(q.0), p.1.max(q.1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_closed_forms() {
        let s = SigmaOrder::new(1.0).unwrap();
        assert!((poisson_harnack_ratio(1, s, 0.5, 1.0).unwrap() - 2.6).abs() < 1e-14);
        assert!((poisson_harnack_ratio(1, s, 0.5, f64::INFINITY).unwrap() - 9.0).abs() < 1e-12);
        assert!((poisson_harnack_ratio(1, s, 0.5, 1e8).unwrap() - 9.0).abs() < 1e-6);
        assert!((poisson_harnack_ratio(2, s, 0.3, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!(poisson_harnack_ratio(1, s, 1.0, 1.0).is_err());
    }

    #[test]
    fn sup_inf_conventions() {
        assert_eq!(sup_inf_ratio([0.0, 0.0].into_iter()), Some(1.0));
        assert_eq!(sup_inf_ratio([0.0, 1.0].into_iter()), Some(f64::INFINITY));
        assert_eq!(sup_inf_ratio(std::iter::empty()), None);
        assert_eq!(sup_inf_ratio([2.0, 1.0].into_iter()), Some(2.0));
    }

    #[test]
    fn certificate_json_roundtrip_with_infinity() {
        let c = finish(
            0.5,
            10.0,
            Some((
                f64::INFINITY,
                Witness {
                    x: vec![0.0],
                    xi: vec![1.0],
                    r: 0.5,
                },
            )),
            SamplingInfo {
                shape: "ball".into(),
                regions: 1,
                points_per_region: 64,
                extremal_points: true,
                skipped: 0,
            },
        );
        assert!(!c.passed);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"worst_ratio\":\"inf\""));
        let back: HarnackCertificate = serde_json::from_str(&s).unwrap();
        assert!(back.worst_ratio.is_infinite());
    }
}
