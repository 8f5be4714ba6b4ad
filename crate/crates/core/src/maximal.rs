//! Grid functions, the centred Hardy-Littlewood maximal operator, maximal
//! operators of two-parameter kernel families, weak-type curves and the
//! translation-regularity integrals used to check the hypotheses of Zó's
//! theorem for the Lévy family.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::experiments::convolve::{ConvolutionPlan, ConvolveOptions, Extension};
use crate::kernels::{
    self, levy_derivative_1d, levy_phi3_scaled, mollify, GaussianProfile, LevyOptions, LevyTable,
    PoissonProfile, RadialProfile, SharedProfile, SigmaOrder,
};
use crate::quad::{self, QuadOptions};
use crate::special::omega;

/// Values on the uniform lattice `origin + h k`, `k` in `[0, shape)`,
/// stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    origin: Vec<f64>,
    h: f64,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(origin: Vec<f64>, h: f64, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid("h", h, "grid spacing must be positive"));
        }
        if origin.len() != shape.len() || origin.is_empty() {
            return Err(Error::Dimension(format!(
                "origin has {} coordinates, shape has {} axes",
                origin.len(),
                shape.len()
            )));
        }
        let count: usize = shape.iter().product();
        if count != values.len() {
            return Err(Error::Dimension(format!(
                "{} values for a grid of {count} nodes",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid("value", *v, "grid values must be finite"));
        }
        Ok(Self {
            origin,
            h,
            shape,
            values,
        })
    }

    pub fn line(x0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(vec![x0], h, vec![n], values)
    }

    /// Samples `f` at `a, a + h, ...` up to `b` (inclusive within h/1000).
    pub fn sample_line(a: f64, b: f64, h: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(b >= a) {
            return Err(invalid("b", b, "interval end precedes its start"));
        }
        let n = ((b - a) / h + 1e-3).floor() as usize + 1;
        Self::line(a, h, (0..n).map(|k| f(a + k as f64 * h)).collect())
    }

    /// Samples `f` on a square-celled box lattice.
    pub fn sample_lattice(
        origin: Vec<f64>,
        h: f64,
        shape: Vec<usize>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let count: usize = shape.iter().product();
        let proto = Self {
            origin,
            h,
            shape,
            values: vec![0.0; count],
        };
        let values = (0..count).map(|i| f(&proto.node(i))).collect();
        Self::new(proto.origin, proto.h, proto.shape, values)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    fn index_of(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = i % self.shape[a];
            i /= self.shape[a];
        }
        idx
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        self.index_of(i)
            .iter()
            .zip(&self.origin)
            .map(|(&k, &o)| o + k as f64 * self.h)
            .collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.origin.clone(), self.h, self.shape.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.cell_volume()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Same origin, spacing and shape.
    pub fn same_grid(&self, other: &Self) -> bool {
        self.shape == other.shape && self.origin == other.origin && self.h == other.h
    }

    /// Columns `x1, ..., xn, value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim()).map(|a| format!("x{a}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.node(i).iter().map(|x| x.to_string()).collect();
            row.push(v.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format of [`write_csv`](Self::write_csv). Rows may come in
    /// any order but must fill a uniform lattice.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let dim = r
            .headers()?
            .len()
            .checked_sub(1)
            .filter(|&d| d > 0)
            .ok_or_else(|| {
                Error::Config(
                    "grid CSV needs at least one coordinate column and a value column".into(),
                )
            })?;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let nums = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(nums);
        }
        if rows.is_empty() {
            return Err(Error::Empty("grid CSV"));
        }
        let mut axes: Vec<Vec<f64>> = (0..dim)
            .map(|a| {
                let mut v: Vec<f64> = rows.iter().map(|r| r[a]).collect();
                v.sort_by(f64::total_cmp);
                v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
                v
            })
            .collect();
        let h = axes
            .iter()
            .find(|ax| ax.len() > 1)
            .map(|ax| (ax[ax.len() - 1] - ax[0]) / (ax.len() - 1) as f64)
            .unwrap_or(1.0);
        for ax in &axes {
            for w in ax.windows(2) {
                if ((w[1] - w[0]) - h).abs() > 1e-6 * h {
                    return Err(Error::Config(
                        "grid CSV coordinates are not uniformly spaced".into(),
                    ));
                }
            }
        }
        let origin: Vec<f64> = axes.iter().map(|ax| ax[0]).collect();
        let shape: Vec<usize> = axes.iter_mut().map(|ax| ax.len()).collect();
        let count: usize = shape.iter().product();
        if count != rows.len() {
            return Err(Error::Config(format!(
                "{} rows do not fill a {shape:?} lattice",
                rows.len()
            )));
        }
        let mut values = vec![f64::NAN; count];
        for row in &rows {
            let mut i = 0;
            for a in 0..dim {
                let k = ((row[a] - origin[a]) / h).round() as usize;
                i = i * shape[a] + k;
            }
            values[i] = row[dim];
        }
        Self::new(origin, h, shape, values)
    }
}

/// Centred maximal function `sup_r |B(x, r)|^{-1} int_B |f|` with `f` taken
/// as constant on lattice cells and zero off the grid. Balls are counted in
/// lattice points, so on the line this is exact for the piecewise-constant
/// reading of `f`; in higher dimension it is the lattice analogue.
pub fn hl_maximal(f: &GridFunction) -> Result<GridFunction> {
    if f.is_empty() {
        return Err(Error::Empty("grid function"));
    }
    let abs: Vec<f64> = f.values.iter().map(|v| v.abs()).collect();
    let out = if f.dim() == 1 {
        hl_line(&abs)
    } else {
        hl_lattice(f, &abs)
    };
    f.with_values(out)
}

fn hl_line(abs: &[f64]) -> Vec<f64> {
    let n = abs.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + abs[i];
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let reach = i.max(n - 1 - i);
            let mut best = abs[i];
            for k in 1..=reach {
                let lo = i.saturating_sub(k);
                let hi = (i + k).min(n - 1);
                best = best.max((prefix[hi + 1] - prefix[lo]) / (2 * k + 1) as f64);
            }
            best
        })
        .collect()
}

fn hl_lattice(f: &GridFunction, abs: &[f64]) -> Vec<f64> {
    let dim = f.dim();
    // Lattice offsets, grouped by squared length, spanning the whole grid.
    let ranges: Vec<i64> = f.shape.iter().map(|&s| s as i64 - 1).collect();
    let mut shells: BTreeMap<i64, Vec<Vec<i64>>> = BTreeMap::new();
    let total: usize = ranges.iter().map(|&r| (2 * r + 1) as usize).product();
    for mut k in 0..total {
        let mut off = vec![0i64; dim];
        for a in (0..dim).rev() {
            let w = (2 * ranges[a] + 1) as usize;
            off[a] = (k % w) as i64 - ranges[a];
            k /= w;
        }
        let r2 = off.iter().map(|o| o * o).sum();
        shells.entry(r2).or_default().push(off);
    }
    (0..f.len())
        .into_par_iter()
        .map(|i| {
            let idx = f.index_of(i);
            let mut sum = 0.0;
            let mut count = 0usize;
            let mut best: f64 = 0.0;
            for offs in shells.values() {
                for off in offs {
                    count += 1;
                    let mut j = 0usize;
                    let mut inside = true;
                    for a in 0..dim {
                        let c = idx[a] as i64 + off[a];
                        if c < 0 || c >= f.shape[a] as i64 {
                            inside = false;
                            break;
                        }
                        j = j * f.shape[a] + c as usize;
                    }
                    if inside {
                        sum += abs[j];
                    }
                }
                best = best.max(sum / count as f64);
            }
            best
        })
        .collect()
}

/// Finite set of `(sigma, y)` pairs standing in for the continuum of
/// stability orders and scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pairs: Vec<(f64, f64)>,
}

impl ParamGrid {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty("parameter grid"));
        }
        for &(s, y) in &pairs {
            SigmaOrder::new(s)?;
            if !(y > 0.0) || !y.is_finite() {
                return Err(invalid("y", y, "scale must be positive and finite"));
            }
        }
        Ok(Self { pairs })
    }

    /// Product of log-spaced axes.
    pub fn log_spaced(
        sigma: (f64, f64),
        y: (f64, f64),
        n_sigma: usize,
        n_y: usize,
    ) -> Result<Self> {
        let ss = kernels::log_space(sigma.0, sigma.1, n_sigma);
        let ys = kernels::log_space(y.0, y.1, n_y);
        Self::new(
            ss.iter()
                .flat_map(|&s| ys.iter().map(move |&y| (s, y)))
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn sigmas(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.pairs.iter().map(|p| p.0).collect();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }
}

/// Unit-scale profile constructors for the families swept by the maximal
/// operators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileFamily {
    Poisson {
        n: usize,
    },
    /// One-dimensional Lévy profiles, tabulated once per order.
    Levy,
    /// Ignores sigma.
    Gaussian {
        n: usize,
    },
}

impl ProfileFamily {
    /// Unit-scale profile per distinct sigma of the grid.
    pub fn profiles(&self, sigmas: &[f64]) -> Result<Vec<(f64, SharedProfile)>> {
        sigmas
            .par_iter()
            .map(|&s| {
                let p: SharedProfile = match *self {
                    Self::Poisson { n } => Arc::new(PoissonProfile::new(n, SigmaOrder::new(s)?)?),
                    Self::Levy => Arc::new(LevyTable::new(
                        s,
                        &LevyOptions {
                            sigma_min: 1e-2,
                            ..Default::default()
                        },
                    )?),
                    Self::Gaussian { n } => Arc::new(GaussianProfile::new(n)),
                };
                Ok((s, p))
            })
            .collect()
    }

    /// Mollified profiles, one per grid pair.
    pub fn kernels(&self, grid: &ParamGrid) -> Result<Vec<((f64, f64), SharedProfile)>> {
        let units = self.profiles(&grid.sigmas())?;
        grid.pairs
            .iter()
            .map(|&(s, y)| {
                let unit = &units.iter().find(|u| u.0 == s).expect("sigma listed").1;
                Ok(((s, y), Arc::new(mollify(unit.clone(), y)?) as SharedProfile))
            })
            .collect()
    }
}

/// Nodewise `sup |K^sigma_y * f|` over the parameter grid.
pub fn family_maximal(
    family: &ProfileFamily,
    grid: &ParamGrid,
    f: &GridFunction,
    opts: &ConvolveOptions,
) -> Result<GridFunction> {
    let kernels = family.kernels(grid)?;
    family_maximal_with(&kernels, f, opts)
}

/// [`family_maximal`] over prebuilt kernels.
pub fn family_maximal_with(
    kernels: &[((f64, f64), SharedProfile)],
    f: &GridFunction,
    opts: &ConvolveOptions,
) -> Result<GridFunction> {
    Ok(family_maximal_many(kernels, &[(f, opts.extension)], opts)?.remove(0))
}

/// [`family_maximal`] for several functions on one grid geometry, sharing
/// the convolution weights of each kernel. `opts.extension` is replaced by
/// the per-function extension.
pub fn family_maximal_many(
    kernels: &[((f64, f64), SharedProfile)],
    fs: &[(&GridFunction, Extension)],
    opts: &ConvolveOptions,
) -> Result<Vec<GridFunction>> {
    if kernels.is_empty() {
        return Err(Error::Empty("parameter grid"));
    }
    if fs.is_empty() {
        return Err(Error::Empty("functions"));
    }
    let per_kernel = kernels
        .par_iter()
        .map(|((s, y), k)| {
            let fail = |e: Error| {
                Error::Precondition(format!("convolution with sigma = {s}, y = {y} failed: {e}"))
            };
            let plan = ConvolutionPlan::new(k.as_ref(), fs[0].0, opts).map_err(fail)?;
            fs.iter()
                .map(|(f, ext)| plan.apply(f, *ext).map_err(fail))
                .collect::<Result<Vec<GridFunction>>>()
        })
        .collect::<Result<Vec<Vec<GridFunction>>>>()?;
    let mut out: Vec<GridFunction> = per_kernel[0].iter().map(|g| g.map(f64::abs)).collect();
    for row in &per_kernel[1..] {
        for (acc, g) in out.iter_mut().zip(row) {
            for (o, v) in acc.values.iter_mut().zip(&g.values) {
                *o = o.max(v.abs());
            }
        }
    }
    Ok(out)
}

/// `(omega_n^2 / gamma^n) ((1 + gamma)/(1 - gamma))^{2n + sigma}`.
pub fn domination_constant(n: usize, gamma: f64, sigma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", gamma, "must lie in (0, 1)"));
    }
    let w = omega(n);
    Ok(w * w / gamma.powi(n as i32) * ((1.0 + gamma) / (1.0 - gamma)).powf(2.0 * n as f64 + sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeCurve {
    pub lambdas: Vec<f64>,
    /// `lambda |{Tf > lambda}|`.
    pub values: Vec<f64>,
    pub f_l1: f64,
    /// `sup_lambda lambda |{Tf > lambda}|` over every level, not only the
    /// listed lambdas.
    pub sup: f64,
}

impl WeakTypeCurve {
    /// `sup / ||f||_1`.
    pub fn constant(&self) -> f64 {
        self.sup / self.f_l1
    }

    /// Columns `lambda, lambda_times_measure`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "lambda_times_measure"])?;
        for (l, v) in self.lambdas.iter().zip(&self.values) {
            w.write_record([l.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Level-set measures of `|Tf|` by node counting (strict inequality).
pub fn weak_type_curve(
    tf: &GridFunction,
    f: &GridFunction,
    lambdas: &[f64],
) -> Result<WeakTypeCurve> {
    if !tf.same_grid(f) {
        return Err(Error::Dimension(
            "Tf and f must live on the same grid".into(),
        ));
    }
    let cell = tf.cell_volume();
    let mut sorted: Vec<f64> = tf.values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let measure_above = |l: f64| sorted.partition_point(|&v| v > l) as f64 * cell;
    let values = lambdas.iter().map(|&l| l * measure_above(l)).collect();
    // As lambda rises to the k-th largest value the level set keeps k nodes.
    let sup = sorted
        .iter()
        .enumerate()
        .map(|(k, &v)| v * (k + 1) as f64 * cell)
        .fold(0.0, f64::max);
    Ok(WeakTypeCurve {
        lambdas: lambdas.to_vec(),
        values,
        f_l1: f.l1_norm(),
        sup,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoIntegral {
    pub z: f64,
    pub x_extent: f64,
    /// Quadrature over `2|z| <= |x| <= x_extent`.
    pub inner: f64,
    /// `2 C |z| / (x_extent - |z|)`, bounding the rest.
    pub tail: f64,
    pub total: f64,
}

/// `int_{2|z| <= |x|} sup_alpha |k_alpha(x - z) - k_alpha(x)| dx` on the line,
/// by quadrature up to `x_extent` plus the tail bound from
/// `|k_alpha'(x)| <= C / x^2`.
pub fn zo_regularity_integral(
    kernels: &[SharedProfile],
    z: f64,
    x_extent: f64,
    tail_constant: f64,
    opts: &QuadOptions,
) -> Result<ZoIntegral> {
    let az = z.abs();
    if az == 0.0 {
        return Err(invalid("z", z, "offset must be nonzero"));
    }
    if !(x_extent >= 4.0 * az) {
        return Err(invalid("x_extent", x_extent, "must be at least 4|z|"));
    }
    if kernels.is_empty() {
        return Err(Error::Empty("kernel family"));
    }
    if kernels.iter().any(|k| k.dim() != 1) {
        return Err(Error::Dimension(
            "regularity integrals are implemented on the line".into(),
        ));
    }
    let sup_diff = |x: f64| {
        kernels
            .iter()
            .map(|k| (k.eval((x - z).abs()) - k.eval(x.abs())).abs())
            .fold(0.0, f64::max)
    };
    let scales: Vec<f64> = kernels.iter().map(|k| k.length_scale()).collect();
    let mut breaks = vec![2.0 * az, x_extent];
    for &s in &scales {
        breaks.extend(quad::geometric_breaks(2.0 * az, x_extent, s));
    }
    breaks.extend(kernels::log_space(2.0 * az, x_extent, 32));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let right = quad::integrate_with_breaks(sup_diff, &breaks, opts)?;
    let left = quad::integrate_with_breaks(|x| sup_diff(-x), &breaks, opts)?;
    let inner = right.value + left.value;
    let tail = 2.0 * tail_constant * az / (x_extent - az);
    Ok(ZoIntegral {
        z,
        x_extent,
        inner,
        tail,
        total: inner + tail,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phi3Row {
    pub sigma: f64,
    pub rho: f64,
    /// `rho^3 Phi^3_sigma(rho)`.
    pub phi3_scaled: f64,
    /// `rho^2 |v'_sigma(rho)|`.
    pub derivative_scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phi3Scan {
    pub rows: Vec<Phi3Row>,
    /// `max |rho^3 Phi^3|` over the scan.
    pub max_phi3: f64,
    /// `max rho^2 |v'|`, which equals `2 pi max |rho^3 Phi^3|` here.
    pub max_derivative: f64,
    /// Largest relative defect in `rho^2 |v'| = 2 pi rho^3 |Phi^3|`.
    pub relation_defect: f64,
    /// No order grows across the last decade of the rho grid.
    pub no_growth: bool,
}

/// Scans `rho^3 Phi^3_sigma(rho)` and the derivative bound it controls.
pub fn phi3_bound_scan(sigmas: &[f64], rhos: &[f64], opts: &LevyOptions) -> Result<Phi3Scan> {
    if sigmas.is_empty() || rhos.is_empty() {
        return Err(Error::Empty("scan grid"));
    }
    let pairs: Vec<(f64, f64)> = sigmas
        .iter()
        .flat_map(|&s| rhos.iter().map(move |&r| (s, r)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(sigma, rho)| {
            Ok(Phi3Row {
                sigma,
                rho,
                phi3_scaled: levy_phi3_scaled(sigma, rho, opts)?,
                derivative_scaled: rho * rho * levy_derivative_1d(sigma, rho, opts)?.abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let max_phi3 = rows.iter().map(|r| r.phi3_scaled.abs()).fold(0.0, f64::max);
    let max_derivative = rows.iter().map(|r| r.derivative_scaled).fold(0.0, f64::max);
    let relation_defect = rows
        .iter()
        .map(|r| {
            let rhs = two_pi * r.phi3_scaled.abs();
            (r.derivative_scaled - rhs).abs() / rhs.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    let rho_max = rhos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let no_growth = sigmas.iter().all(|&s| {
        let mut decade: Vec<&Phi3Row> = rows
            .iter()
            .filter(|r| r.sigma == s && r.rho >= rho_max / 10.0)
            .collect();
        decade.sort_by(|a, b| a.rho.total_cmp(&b.rho));
        match (decade.first(), decade.last()) {
            (Some(a), Some(b)) => b.phi3_scaled.abs() <= a.phi3_scaled.abs() * (1.0 + 1e-9),
            _ => true,
        }
    });
    Ok(Phi3Scan {
        rows,
        max_phi3,
        max_derivative,
        relation_defect,
        no_growth,
    })
}

/// `sup_rho rho^2 |k'(rho)|` for a unit-scale profile, by central differences
/// on a log grid. Scale-invariant, so it bounds every mollification.
pub fn derivative_tail_constant(profile: &dyn RadialProfile, rhos: &[f64]) -> f64 {
    rhos.iter()
        .map(|&r| {
            let d = 1e-5 * r;
            let slope = (profile.eval(r + d) - profile.eval(r - d)) / (2.0 * d);
            r * r * slope.abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_maximal_at_three() {
        let f =
            GridFunction::sample_line(-10.0, 10.0, 0.5, |x| if x.abs() <= 1.0 { 1.0 } else { 0.0 })
                .unwrap();
        let m = hl_maximal(&f).unwrap();
        let i = f.nodes().position(|x| (x[0] - 3.0).abs() < 1e-12).unwrap();
        // Five cells of mass in a ball of 17 cells (radius 4 plus a half cell).
        assert!((m.values()[i] - 5.0 / 17.0).abs() < 1e-14);
    }

    #[test]
    fn domination_constant_example() {
        assert!((domination_constant(1, 0.5, 1.0).unwrap() - 216.0).abs() < 1e-10);
    }

    #[test]
    fn weak_type_indicator() {
        let f = GridFunction::line(0.0, 0.25, vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        let c = weak_type_curve(&f, &f, &[0.5, 2.0]).unwrap();
        assert_eq!(c.values, vec![0.5, 0.0]);
        assert_eq!(c.sup, 1.0);
    }

    #[test]
    fn csv_round_trip_2d() {
        let g =
            GridFunction::sample_lattice(vec![0.0, 1.0], 0.5, vec![3, 2], |x| x[0] + 10.0 * x[1])
                .unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert_eq!(GridFunction::read_csv(buf.as_slice()).unwrap(), g);
    }
}
