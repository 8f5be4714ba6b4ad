//! Finite spaces of homogeneous type: quasi-distance matrix plus point
//! masses, their geometric constants, the measure-based normalization of
//! the distance, annulus classes, and the maximal and concentration checks
//! built on them.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::harnack::{self, HarnackCertificate};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceFlags {
    /// Masses stand for cells of a continuum rather than genuine atoms.
    #[serde(default)]
    pub non_atomic: bool,
    /// The sample approximates an unbounded space.
    #[serde(default)]
    pub unbounded: bool,
}

/// Points with a symmetric quasi-distance and positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHomSpace {
    coords: Vec<Vec<f64>>,
    dist: Vec<f64>,
    mass: Vec<f64>,
    cell_volume: Option<f64>,
    flags: SpaceFlags,
}

impl FiniteHomSpace {
    /// Validates symmetry, a zero diagonal, positive off-diagonal distances
    /// and positive masses.
    pub fn new(
        coords: Vec<Vec<f64>>,
        dist: Vec<f64>,
        mass: Vec<f64>,
        flags: SpaceFlags,
    ) -> Result<Self> {
        let m = mass.len();
        if m == 0 {
            return Err(Error::Empty("space points"));
        }
        if dist.len() != m * m || coords.len() != m {
            return Err(Error::Dimension(format!(
                "{m} masses need a {m}x{m} distance matrix and {m} coordinate rows"
            )));
        }
        for i in 0..m {
            if !(mass[i] > 0.0) {
                return Err(invalid(
                    "mass",
                    mass[i],
                    format!("point {i} must carry positive mass"),
                ));
            }
            if dist[i * m + i] != 0.0 {
                return Err(invalid(
                    "dist",
                    dist[i * m + i],
                    format!("d({i}, {i}) must vanish"),
                ));
            }
            for j in i + 1..m {
                let (a, b) = (dist[i * m + j], dist[j * m + i]);
                if a != b {
                    return Err(invalid(
                        "dist",
                        a,
                        format!("d({i}, {j}) != d({j}, {i}) = {b}"),
                    ));
                }
                if !(a > 0.0) {
                    return Err(invalid(
                        "dist",
                        a,
                        format!("distinct points {i}, {j} at distance zero"),
                    ));
                }
            }
        }
        Ok(Self {
            coords,
            dist,
            mass,
            cell_volume: None,
            flags,
        })
    }

    /// Points on a line with `|x - y|`, optionally raised to `power`
    /// (a snowflaked metric for `power < 1`).
    pub fn line(points: Vec<f64>, mass: Vec<f64>, power: f64, flags: SpaceFlags) -> Result<Self> {
        let m = points.len();
        let mut dist = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                dist[i * m + j] = (points[i] - points[j]).abs().powf(power);
            }
        }
        Self::new(
            points.into_iter().map(|p| vec![p]).collect(),
            dist,
            mass,
            flags,
        )
    }

    /// Points in R^n with Euclidean distance.
    pub fn euclidean(coords: Vec<Vec<f64>>, mass: Vec<f64>, flags: SpaceFlags) -> Result<Self> {
        let m = coords.len();
        let mut dist = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                dist[i * m + j] = harnack::distance(&coords[i], &coords[j]);
            }
        }
        Self::new(coords, dist, mass, flags)
    }

    /// Cell midpoints of `[a, b]` split into `m` cells, each weighted by its length.
    pub fn uniform_interval(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(b > a) || m < 2 {
            return Err(Error::Precondition(
                "uniform interval needs b > a and at least two cells".into(),
            ));
        }
        let h = (b - a) / m as f64;
        let pts = (0..m).map(|i| a + (i as f64 + 0.5) * h).collect();
        let mut s = Self::line(
            pts,
            vec![h; m],
            1.0,
            SpaceFlags {
                non_atomic: true,
                unbounded: true,
            },
        )?;
        s.cell_volume = Some(h);
        Ok(s)
    }

    /// Cells of `[0, len]` carrying the exact `x^{-1/2} dx` mass
    /// `2 (sqrt(b) - sqrt(a))`, represented by their midpoints.
    pub fn sqrt_weighted_half_line(len: f64, m: usize) -> Result<Self> {
        if !(len > 0.0) || m < 2 {
            return Err(Error::Precondition(
                "half-line sample needs positive length and two cells".into(),
            ));
        }
        let h = len / m as f64;
        let pts: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * h).collect();
        let mass = (0..m)
            .map(|i| 2.0 * (((i + 1) as f64 * h).sqrt() - (i as f64 * h).sqrt()))
            .collect();
        let mut s = Self::line(
            pts,
            mass,
            1.0,
            SpaceFlags {
                non_atomic: true,
                unbounded: true,
            },
        )?;
        s.cell_volume = Some(h);
        Ok(s)
    }

    /// Cell midpoints of the union of `(2k - 1/2, 2k + 1/2)` for `|k| <= k_max`,
    /// `per_unit` cells per interval.
    pub fn gapped_union(k_max: usize, per_unit: usize) -> Result<Self> {
        let h = 1.0 / per_unit as f64;
        let k = k_max as i64;
        let mut pts = Vec::new();
        for c in -k..=k {
            for j in 0..per_unit {
                pts.push(2.0 * c as f64 - 0.5 + (j as f64 + 0.5) * h);
            }
        }
        let m = pts.len();
        let mut s = Self::line(
            pts,
            vec![h; m],
            1.0,
            SpaceFlags {
                non_atomic: true,
                unbounded: true,
            },
        )?;
        s.cell_volume = Some(h);
        Ok(s)
    }

    /// Samples of the union of `[2^n - 1, 2^n + 1]` for `n = 1..=n_max`, with
    /// `per_interval` equally spaced points per interval including both ends
    /// (the first two intervals share the point 3).
    pub fn dyadic_union(n_max: u32, per_interval: usize) -> Result<Self> {
        if per_interval < 2 {
            return Err(Error::Precondition(
                "dyadic union needs at least two points per interval".into(),
            ));
        }
        let h = 2.0 / (per_interval - 1) as f64;
        let mut pts: Vec<f64> = Vec::new();
        for n in 1..=n_max {
            let c = 2f64.powi(n as i32);
            for j in 0..per_interval {
                pts.push(c - 1.0 + j as f64 * h);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let m = pts.len();
        let mut s = Self::line(
            pts,
            vec![h; m],
            1.0,
            SpaceFlags {
                non_atomic: true,
                unbounded: true,
            },
        )?;
        s.cell_volume = Some(h);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn flags(&self) -> SpaceFlags {
        self.flags
    }

    pub fn cell_volume(&self) -> Option<f64> {
        self.cell_volume
    }

    /// Coordinates of point `i`; abstract points report their index.
    pub fn coordinates(&self, i: usize) -> Vec<f64> {
        self.coords[i].clone()
    }

    /// First coordinate of every point (the position, for line samples).
    pub fn positions(&self) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| c.first().copied().unwrap_or(f64::NAN))
            .collect()
    }

    /// The open ball `{z : d(c, z) < r}`.
    pub fn ball(&self, c: usize, r: f64) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&z| self.dist(c, z) < r)
    }

    pub fn ball_mass(&self, c: usize, r: f64) -> f64 {
        self.ball(c, r).map(|z| self.mass[z]).sum()
    }

    /// Index of the point nearest to `coords`.
    pub fn nearest(&self, coords: &[f64]) -> usize {
        (0..self.len())
            .min_by(|&a, &b| {
                harnack::distance(&self.coords[a], coords)
                    .total_cmp(&harnack::distance(&self.coords[b], coords))
            })
            .expect("space is nonempty")
    }

    /// The same points and masses under another distance matrix.
    fn with_dist(&self, dist: Vec<f64>) -> Result<Self> {
        let mut s = Self::new(self.coords.clone(), dist, self.mass.clone(), self.flags)?;
        s.cell_volume = self.cell_volume;
        Ok(s)
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: SpaceFile = serde_json::from_str(&text)?;
        file.build()
    }
}

/// On-disk description of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub points: Vec<PointSpec>,
    pub dist: DistSpec,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    pub weights: WeightSpec,
    #[serde(default)]
    pub flags: SpaceFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistSpec {
    Euclidean,
    Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Named(NamedWeight),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedWeight {
    Uniform,
    SqrtInv,
}

impl SpaceFile {
    pub fn build(&self) -> Result<FiniteHomSpace> {
        let coords: Vec<Vec<f64>> = self
            .points
            .iter()
            .map(|p| match p {
                PointSpec::Scalar(v) => vec![*v],
                PointSpec::Vector(v) => v.clone(),
            })
            .collect();
        let m = coords.len();
        if m == 0 {
            return Err(Error::Empty("space points"));
        }
        let mass = match &self.weights {
            WeightSpec::Explicit(w) => w.clone(),
            WeightSpec::Named(NamedWeight::Uniform) => vec![1.0 / m as f64; m],
            WeightSpec::Named(NamedWeight::SqrtInv) => {
                // Midpoint cells of a sorted one-dimensional sample.
                let xs: Vec<f64> = coords.iter().map(|c| c[0]).collect();
                if xs.iter().any(|&x| x <= 0.0) {
                    return Err(Error::Config(
                        "sqrt_inv weights need positive coordinates".into(),
                    ));
                }
                (0..m)
                    .map(|i| {
                        let lo = if i == 0 {
                            0.0
                        } else {
                            0.5 * (xs[i - 1] + xs[i])
                        };
                        let hi = if i + 1 == m {
                            xs[i] + (xs[i] - lo)
                        } else {
                            0.5 * (xs[i] + xs[i + 1])
                        };
                        2.0 * (hi.sqrt() - lo.sqrt())
                    })
                    .collect()
            }
        };
        match self.dist {
            DistSpec::Euclidean => FiniteHomSpace::euclidean(coords, mass, self.flags),
            DistSpec::Matrix => {
                let rows = self.matrix.as_ref().ok_or_else(|| {
                    Error::Config("dist = \"matrix\" requires a `matrix` field".into())
                })?;
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(Error::Config(format!("distance matrix must be {m}x{m}")));
                }
                FiniteHomSpace::new(coords, rows.concat(), mass, self.flags)
            }
        }
    }
}

/// A kernel on a finite space, stored densely by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    m: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("kernel matrix must be square".into()));
        }
        Ok(Self {
            m,
            values: rows.concat(),
        })
    }

    pub fn from_fn(m: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let values = (0..m * m)
            .into_par_iter()
            .map(|k| f(k / m, k % m))
            .collect();
        Self { m, values }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    /// `sum_z K(x, z) mu(z)`.
    pub fn row_mass(&self, space: &FiniteHomSpace, x: usize) -> f64 {
        (0..self.m).map(|z| self.get(x, z) * space.mass(z)).sum()
    }

    /// `x -> sum_z K(x, z) f(z) mu(z)`.
    pub fn apply(&self, space: &FiniteHomSpace, f: &[f64]) -> Vec<f64> {
        (0..self.m)
            .into_par_iter()
            .map(|x| {
                (0..self.m)
                    .map(|z| self.get(x, z) * f[z] * space.mass(z))
                    .sum()
            })
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.m).all(|i| {
            (i + 1..self.m).all(|j| {
                (self.get(i, j) - self.get(j, i)).abs() <= tol * self.get(i, j).abs().max(1.0)
            })
        })
    }
}

/// `max d(x, z) / (d(x, y) + d(y, z))` over all triples with `x != z`. The
/// middle point ranges over every point, so the result is at least 1.
pub fn triangle_constant(space: &FiniteHomSpace) -> Result<f64> {
    let m = space.len();
    if m < 3 {
        return Err(Error::Precondition(
            "triangle constant needs at least three points".into(),
        ));
    }
    Ok((0..m)
        .into_par_iter()
        .map(|x| {
            let mut best = 0.0f64;
            for z in 0..m {
                if z == x {
                    continue;
                }
                let dxz = space.dist(x, z);
                for y in 0..m {
                    best = best.max(dxz / (space.dist(x, y) + space.dist(y, z)));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max))
}

/// `max mu(B(x, 2r)) / mu(B(x, r))` over the probes.
pub fn doubling_constant(space: &FiniteHomSpace, probes: &[(usize, f64)]) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::Empty("doubling probes"));
    }
    Ok(probes
        .par_iter()
        .map(|&(x, r)| space.ball_mass(x, 2.0 * r) / space.ball_mass(x, r))
        .reduce(|| 1.0, f64::max))
}

/// Every `stride`-th point paired with each radius.
pub fn grid_probes(space: &FiniteHomSpace, stride: usize, radii: &[f64]) -> Vec<(usize, f64)> {
    (0..space.len())
        .step_by(stride.max(1))
        .flat_map(|x| radii.iter().map(move |&r| (x, r)))
        .collect()
}

/// For each center, the mass of the closed ball `{p : d(c, p) <= d(c, q)}`
/// indexed by `q`.
fn closed_ball_masses(space: &FiniteHomSpace) -> Vec<Vec<f64>> {
    let m = space.len();
    (0..m)
        .into_par_iter()
        .map(|c| {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| space.dist(c, a).total_cmp(&space.dist(c, b)));
            let mut out = vec![0.0; m];
            let mut i = 0;
            let mut acc = 0.0;
            while i < m {
                let d = space.dist(c, order[i]);
                let mut j = i;
                while j < m && space.dist(c, order[j]) == d {
                    acc += space.mass(order[j]);
                    j += 1;
                }
                for &q in &order[i..j] {
                    out[q] = acc;
                }
                i = j;
            }
            out
        })
        .collect()
}

/// Replaces the distance by `delta(x, y)`, the least mass of a ball that
/// contains both points. Balls are centered at sample points; the infimum
/// over open radii `r > max(d(c, x), d(c, y))` is the closed ball of that radius.
pub fn normalize(space: &FiniteHomSpace) -> Result<FiniteHomSpace> {
    let m = space.len();
    let cm = closed_ball_masses(space);
    let dist: Vec<f64> = (0..m * m)
        .into_par_iter()
        .map(|k| {
            let (x, y) = (k / m, k % m);
            if x == y {
                return 0.0;
            }
            cm.iter()
                .map(|row| row[x].max(row[y]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    space.with_dist(dist)
}

/// Range of `delta(x, y) / mu(B_d(x, d(x, y)))` over pairs `x != y`, where the
/// ball is closed.
pub fn delta_comparability(space: &FiniteHomSpace, normalized: &FiniteHomSpace) -> (f64, f64) {
    let m = space.len();
    let cm = closed_ball_masses(space);
    (0..m)
        .into_par_iter()
        .map(|x| {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for (y, ball) in cm[x].iter().enumerate() {
                if x != y {
                    let r = normalized.dist(x, y) / ball;
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
            (lo, hi)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConstants {
    pub tau: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

impl GeometryConstants {
    /// Measured constants inflated by a safety factor, with `tau` and `A`
    /// floored at 1.
    pub fn inflated(tau: f64, a: f64, safety: f64) -> Self {
        Self {
            tau: (tau * safety).max(1.0),
            a: (a * safety).max(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalConstants {
    pub tau_tilde: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `tau~ = (6 tau^2)^{log2 A}`, `c1 = 1/A`, `c2 = (10 tau^2)^{log2 A}`.
pub fn predicted_normal_constants(tau: f64, a: f64) -> Result<NormalConstants> {
    if !(tau >= 1.0) {
        return Err(invalid(
            "tau",
            tau,
            "quasi-triangle constant must be at least 1",
        ));
    }
    if !(a >= 1.0) {
        return Err(invalid("A", a, "doubling constant must be at least 1"));
    }
    let e = a.log2();
    Ok(NormalConstants {
        tau_tilde: (6.0 * tau * tau).powf(e),
        c1: 1.0 / a,
        c2: (10.0 * tau * tau).powf(e),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub c1: f64,
    pub c2: f64,
    pub passed: bool,
    /// Extremes of `mu(B_delta(x, r)) / r` over the probes.
    pub measured_min: f64,
    pub measured_max: f64,
    /// `measured_min - c1` and `c2 - measured_max`; negative means violated.
    pub lower_slack: f64,
    pub upper_slack: f64,
    pub probes: usize,
    pub annulus_lemma: Option<AnnulusLemmaReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusLemmaReport {
    pub epsilon: f64,
    pub passed: bool,
    /// Smallest `mu(B(x, (1+eps) c2 r / c1) \ B(x, r)) / (eps c2 r)`.
    pub worst_ratio: f64,
    pub probes: usize,
}

/// Checks `c1 r <= mu(B_delta(x, r)) <= c2 r` on a normalized space, and the
/// annulus lower bound `mu(B(x, (1+eps) c2 r / c1) \ B(x, r)) >= eps c2 r`
/// when `annulus_probes` is nonempty.
pub fn normality_check(
    normalized: &FiniteHomSpace,
    c1: f64,
    c2: f64,
    probes: &[(usize, f64)],
    epsilon: f64,
    annulus_probes: &[(usize, f64)],
) -> NormalityReport {
    let (lo, hi) = probes
        .par_iter()
        .map(|&(x, r)| {
            let q = normalized.ball_mass(x, r) / r;
            (q, q)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    let annulus_lemma = (!annulus_probes.is_empty()).then(|| {
        let worst = annulus_probes
            .par_iter()
            .map(|&(x, r)| {
                let outer = normalized.ball_mass(x, (1.0 + epsilon) * c2 * r / c1);
                (outer - normalized.ball_mass(x, r)) / (epsilon * c2 * r)
            })
            .reduce(|| f64::INFINITY, f64::min);
        AnnulusLemmaReport {
            epsilon,
            passed: worst >= 1.0,
            worst_ratio: worst,
            probes: annulus_probes.len(),
        }
    });
    NormalityReport {
        c1,
        c2,
        passed: lo >= c1 && hi <= c2,
        measured_min: lo,
        measured_max: hi,
        lower_slack: lo - c1,
        upper_slack: c2 - hi,
        probes: probes.len(),
        annulus_lemma,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusScan {
    pub nu: f64,
    pub empty: usize,
    pub first_empty: Option<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusIndexReport {
    pub scans: Vec<AnnulusScan>,
    /// Smallest schedule value from which on no annulus is empty.
    pub index: Option<f64>,
    /// Largest schedule value below `index` with an empty annulus.
    pub bracket_low: Option<f64>,
    pub probes: usize,
}

/// Whether `A(x, r, nu r) = {p : r <= d(x, p) < nu r}` has no points.
pub fn annulus_is_empty(space: &FiniteHomSpace, x: usize, r: f64, nu: f64) -> bool {
    !(0..space.len()).any(|p| {
        let d = space.dist(x, p);
        d >= r && d < nu * r
    })
}

/// Scans the annuli `A(x, r, nu r)` for every `nu` in the schedule.
pub fn annulus_index(
    space: &FiniteHomSpace,
    nu_schedule: &[f64],
    probes: &[(usize, f64)],
) -> Result<AnnulusIndexReport> {
    if let Some(&bad) = nu_schedule.iter().find(|&&nu| !(nu > 1.0)) {
        return Err(invalid("nu", bad, "annulus ratios must exceed 1"));
    }
    let mut nus = nu_schedule.to_vec();
    nus.sort_by(f64::total_cmp);
    let scans: Vec<AnnulusScan> = nus
        .iter()
        .map(|&nu| {
            let empties: Vec<(usize, f64)> = probes
                .par_iter()
                .filter(|&&(x, r)| annulus_is_empty(space, x, r, nu))
                .copied()
                .collect();
            AnnulusScan {
                nu,
                empty: empties.len(),
                first_empty: empties.first().copied(),
            }
        })
        .collect();
    let mut index = None;
    let mut bracket_low = None;
    for s in scans.iter().rev() {
        if s.empty == 0 {
            index = Some(s.nu);
        } else {
            bracket_low = Some(s.nu);
            break;
        }
    }
    Ok(AnnulusIndexReport {
        scans,
        index,
        bracket_low,
        probes: probes.len(),
    })
}

/// Probes `(x, r)` with `r` just above each realized distance from `x`
/// inside `[r_min, r_max]`. An annulus `A(x, r, nu r)` is empty for some `r`
/// exactly when it is empty for one of these.
pub fn gap_probes(
    space: &FiniteHomSpace,
    points: &[usize],
    r_min: f64,
    r_max: f64,
) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for &x in points {
        let mut ds: Vec<f64> = (0..space.len())
            .map(|p| space.dist(x, p))
            .filter(|&d| d > 0.0)
            .collect();
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        for d in ds {
            let r = d * (1.0 + 1e-9);
            if r >= r_min && r <= r_max {
                out.push((x, r));
            }
        }
    }
    out
}

/// `1 + (4 tau^3 (1+gamma) / (gamma (1 - gamma tau)))^{log2 A}`.
pub fn general_maximal_constant(tau: f64, a: f64, gamma: f64) -> Result<f64> {
    if !(tau >= 1.0) || !(a >= 1.0) {
        return Err(invalid(
            "tau",
            tau,
            "geometric constants must be at least 1",
        ));
    }
    if !(gamma > 0.0 && gamma * tau < 1.0) {
        return Err(invalid(
            "gamma",
            gamma,
            format!("must lie in (0, 1/tau) = (0, {})", 1.0 / tau),
        ));
    }
    let base = 4.0 * tau.powi(3) * (1.0 + gamma) / (gamma * (1.0 - gamma * tau));
    Ok(1.0 + base.powf(a.log2()))
}

/// Hardy-Littlewood maximal function on a finite space: the largest average
/// of `|f|` over balls containing `x`.
pub fn space_hl_maximal(space: &FiniteHomSpace, f: &[f64]) -> Vec<f64> {
    let m = space.len();
    // For each center, averages over the growing closed balls, suffix-maxed
    // so that every ball reaching a point's rank is covered.
    let per_center: Vec<(Vec<usize>, Vec<f64>)> = (0..m)
        .into_par_iter()
        .map(|c| {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| space.dist(c, a).total_cmp(&space.dist(c, b)));
            let mut rank = vec![0usize; m];
            let mut avg = vec![0.0; m];
            let (mut fm, mut mm) = (0.0, 0.0);
            let mut i = 0;
            while i < m {
                let d = space.dist(c, order[i]);
                let mut j = i;
                while j < m && space.dist(c, order[j]) == d {
                    fm += f[order[j]].abs() * space.mass(order[j]);
                    mm += space.mass(order[j]);
                    j += 1;
                }
                for k in i..j {
                    avg[k] = fm / mm;
                    rank[order[k]] = k;
                }
                i = j;
            }
            for k in (0..m.saturating_sub(1)).rev() {
                avg[k] = avg[k].max(avg[k + 1]);
            }
            (rank, avg)
        })
        .collect();
    (0..m)
        .into_par_iter()
        .map(|x| {
            per_center
                .iter()
                .map(|(rank, avg)| avg[rank[x]])
                .fold(0.0, f64::max)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceMaximalReport {
    pub constant: f64,
    pub harnack_h: f64,
    pub gamma: f64,
    /// `max_x K*f(x) / Mf(x)`.
    pub max_ratio: f64,
    pub passed: bool,
    /// `max K(x, x) mu({x})` over the family.
    pub atom_max: f64,
    pub atom_passed: bool,
}

/// Checks `K*f <= C Mf` on a finite space, `C = H^2 (1 + (...)^{log2 A})`.
/// Every kernel must come with a passing ball certificate at the same `gamma`.
pub fn space_maximal_check(
    space: &FiniteHomSpace,
    geometry: GeometryConstants,
    family: &[(KernelMatrix, HarnackCertificate)],
    f: &[f64],
    atom_tol: f64,
) -> Result<SpaceMaximalReport> {
    if family.is_empty() {
        return Err(Error::Empty("kernel family"));
    }
    if f.len() != space.len() {
        return Err(Error::Dimension("function and space sizes differ".into()));
    }
    let gamma = family[0].1.gamma;
    let mut h = 1.0f64;
    for (i, (_, cert)) in family.iter().enumerate() {
        if !cert.passed || cert.gamma != gamma || cert.sampling.shape != "ball" {
            return Err(Error::Precondition(format!(
                "kernel {i} lacks a passing ball Harnack certificate at gamma = {gamma}; run certify_ball_harnack_finite first"
            )));
        }
        h = h.max(cert.h);
    }
    let constant = h * h * general_maximal_constant(geometry.tau, geometry.a, gamma)?;
    let mf = space_hl_maximal(space, f);
    let mut star = vec![0.0f64; space.len()];
    let mut atom_max = 0.0f64;
    for (k, _) in family {
        for (s, v) in star.iter_mut().zip(k.apply(space, f)) {
            *s = s.max(v.abs());
        }
        for x in 0..space.len() {
            atom_max = atom_max.max(k.get(x, x) * space.mass(x));
        }
    }
    let max_ratio = star
        .iter()
        .zip(&mf)
        .map(|(s, m)| {
            if *m > 0.0 {
                s / m
            } else if *s > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(SpaceMaximalReport {
        constant,
        harnack_h: h,
        gamma,
        max_ratio,
        passed: max_ratio <= constant,
        atom_max,
        atom_passed: atom_max <= 1.0 + atom_tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub s: f64,
    pub alpha: f64,
    pub r: f64,
    pub passed: bool,
    /// `max K(x, y) delta(x, y)^{1+s} / alpha` over pairs with `delta > R`.
    pub worst: f64,
    pub witness: Option<(usize, usize)>,
    pub pairs: usize,
}

/// Checks `K(x, y) <= alpha / delta(x, y)^{1+s}` whenever `delta(x, y) > R`.
pub fn stability_check_general(
    normalized: &FiniteHomSpace,
    k: &KernelMatrix,
    s: f64,
    alpha: f64,
    r: f64,
) -> Result<StabilityReport> {
    if !(s > 0.0) || !(alpha > 0.0) || !(r > 0.0) {
        return Err(Error::Precondition(
            "stability check needs s, alpha, R > 0".into(),
        ));
    }
    let m = normalized.len();
    let (worst, witness, pairs) = (0..m)
        .into_par_iter()
        .map(|x| {
            let mut best = (0.0f64, None, 0usize);
            for y in 0..m {
                let d = normalized.dist(x, y);
                if d > r {
                    best.2 += 1;
                    let q = k.get(x, y) * d.powf(1.0 + s) / alpha;
                    if q > best.0 {
                        best.0 = q;
                        best.1 = Some((x, y));
                    }
                }
            }
            best
        })
        .reduce(
            || (0.0, None, 0),
            |a, b| {
                let n = a.2 + b.2;
                if b.0 > a.0 {
                    (b.0, b.1, n)
                } else {
                    (a.0, a.1, n)
                }
            },
        );
    Ok(StabilityReport {
        s,
        alpha,
        r,
        passed: worst <= 1.0,
        worst,
        witness,
        pairs,
    })
}

/// Symmetric Markov kernel from a profile of the distance: `phi(d(x, y))`
/// off the diagonal, scaled down only if some row would exceed unit mass,
/// with the diagonal completing every row to mass one.
pub fn radial_markov_kernel(
    space: &FiniteHomSpace,
    phi: impl Fn(f64) -> f64 + Sync,
) -> KernelMatrix {
    let m = space.len();
    let off = KernelMatrix::from_fn(m, |x, y| if x == y { 0.0 } else { phi(space.dist(x, y)) });
    let worst_row = (0..m).map(|x| off.row_mass(space, x)).fold(0.0, f64::max);
    let scale = worst_row.max(1.0);
    let rows: Vec<f64> = (0..m).map(|x| off.row_mass(space, x) / scale).collect();
    KernelMatrix::from_fn(m, |x, y| {
        if x == y {
            (1.0 - rows[x]) / space.mass(x)
        } else {
            off.get(x, y) / scale
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    pub alpha: f64,
    pub max_tail_mass: f64,
    pub chain_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralConcentrationReport {
    pub gamma: f64,
    pub lambda: f64,
    pub s: f64,
    pub r: f64,
    pub h: f64,
    pub nu: f64,
    pub chain_terms: usize,
    pub points: Vec<ConcentrationPoint>,
    pub decreasing: bool,
    pub chain_dominates: bool,
}

/// Inputs shared by every kernel of a concentration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralConcentrationSetup {
    pub gamma: f64,
    pub lambda: f64,
    pub s: f64,
    pub r: f64,
    pub h: f64,
    pub c1: f64,
    pub c2: f64,
    /// Outer radii for the annulus Harnack certificates.
    pub annulus_radii: Vec<f64>,
}

/// `sum_{j=-1}^{J} H^{j+1}` with `J = ceil(log_nu(R / lambda))`.
pub fn chain_constant(h: f64, nu: f64, r: f64, lambda: f64) -> (f64, usize) {
    let j = ((r / lambda).ln() / nu.ln()).ceil().max(0.0) as usize;
    let c = (0..=j + 1).map(|k| h.powi(k as i32)).sum();
    (c, j)
}

/// Tail masses `max_x sum_{delta(x, y) >= lambda} K_alpha(x, y) mu(y)` along the
/// family, after checking the stability bound and annulus Harnack condition
/// for every member, together with the chain bound
/// `alpha R^{-1-s} C(R, lambda) mu(A(x, lambda, R)) + 2 c2 alpha R^{-s} / (1 - 2^{-s})`.
pub fn general_concentration_run(
    normalized: &FiniteHomSpace,
    family: &[(f64, KernelMatrix)],
    setup: &GeneralConcentrationSetup,
) -> Result<GeneralConcentrationReport> {
    let GeneralConcentrationSetup {
        gamma,
        lambda,
        s,
        r,
        h,
        c1,
        c2,
        ..
    } = *setup;
    let limit = (c1 / (2.0 * c2)).powi(2);
    if gamma > limit {
        return Err(Error::Precondition(format!(
            "gamma = {gamma} exceeds (c1 / (2 c2))^2 = {limit}"
        )));
    }
    let nu = 2.0 * c2 / c1;
    let (chain, j) = chain_constant(h, nu, r, lambda);
    let m = normalized.len();
    let annulus_mass: Vec<f64> = (0..m)
        .map(|x| {
            (0..m)
                .filter(|&y| {
                    let d = normalized.dist(x, y);
                    d >= lambda && d < r
                })
                .map(|y| normalized.mass(y))
                .sum()
        })
        .collect();
    let mut points = Vec::with_capacity(family.len());
    for (alpha, k) in family {
        let stab = stability_check_general(normalized, k, s, *alpha, r)?;
        if !stab.passed {
            return Err(Error::Precondition(format!(
                "kernel with alpha = {alpha} violates the stability bound (worst ratio {:.4} at {:?})",
                stab.worst, stab.witness
            )));
        }
        let cert =
            harnack::certify_annulus_harnack_finite(normalized, k, gamma, h, &setup.annulus_radii)?;
        if !cert.passed {
            return Err(Error::Precondition(format!(
                "kernel with alpha = {alpha} fails the annulus Harnack condition: ratio {} > H = {h}",
                cert.worst_ratio
            )));
        }
        let tails: Vec<f64> = (0..m)
            .into_par_iter()
            .map(|x| {
                (0..m)
                    .filter(|&y| normalized.dist(x, y) >= lambda)
                    .map(|y| k.get(x, y) * normalized.mass(y))
                    .sum()
            })
            .collect();
        let far = 2.0 * c2 * alpha * r.powf(-s) / (1.0 - 2f64.powf(-s));
        let near = alpha * r.powf(-1.0 - s) * chain;
        let chain_bound = annulus_mass
            .iter()
            .map(|a| near * a + far)
            .fold(0.0, f64::max);
        points.push(ConcentrationPoint {
            alpha: *alpha,
            max_tail_mass: tails.iter().copied().fold(0.0, f64::max),
            chain_bound,
        });
    }
    let decreasing = points
        .windows(2)
        .all(|w| w[1].max_tail_mass <= w[0].max_tail_mass);
    let chain_dominates = points.iter().all(|p| p.max_tail_mass <= p.chain_bound);
    Ok(GeneralConcentrationReport {
        gamma,
        lambda,
        s,
        r,
        h,
        nu,
        chain_terms: j + 2,
        points,
        decreasing,
        chain_dominates,
    })
}
