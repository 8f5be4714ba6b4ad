//! Convolution of a one-dimensional radial kernel with a grid function by
//! product integration: `f` is interpolated between nodes and integrated
//! exactly against the kernel through its cumulative integrals
//! `int_0^u g` and `int_0^u rho g`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, RadialProfile};
use crate::maximal::GridFunction;
use crate::quad::QuadOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Linear between nodes; exact for continuous piecewise-linear `f`.
    Linear,
    /// Constant on cells centred at the nodes.
    Constant,
}

/// What `f` is taken to be beyond the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Extension {
    Zero,
    /// Edge values continued to infinity, integrated against the kernel tail.
    Constant,
    /// Unknown beyond the grid; outputs are refused where the worst-case
    /// contribution from outside exceeds `tol`.
    Truncated {
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct ConvolveOptions {
    pub interpolation: Interpolation,
    pub extension: Extension,
    /// Output nodes restricted to this coordinate window.
    pub window: Option<(f64, f64)>,
    pub quad: QuadOptions,
}

impl Default for ConvolveOptions {
    fn default() -> Self {
        Self {
            interpolation: Interpolation::Linear,
            extension: Extension::Zero,
            window: None,
            quad: QuadOptions::with_tol(1e-14, 1e-12),
        }
    }
}

/// `int_0^u rho^k g` extended to negative `u` so that
/// `int_a^b s^k g(|s|) ds = G(b) - G(a)`.
fn signed_primitive(
    profile: &dyn RadialProfile,
    k: u32,
    u: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    let v = kernels::half_line_integral(profile, k, u.abs(), opts)?;
    Ok(if k == 0 && u < 0.0 { -v } else { v })
}

/// `int_u^inf g` for `u >= 0`.
fn half_tail(profile: &dyn RadialProfile, u: f64, opts: &QuadOptions) -> Result<f64> {
    kernels::half_line_tail(profile, u, opts)
}

/// Smallest distance `r` with `scale * T(r) <= tol`, by doubling then bisection.
fn required_padding(
    profile: &dyn RadialProfile,
    scale: f64,
    tol: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    let mut hi = profile.length_scale().max(f64::MIN_POSITIVE);
    while scale * half_tail(profile, hi, opts)? > tol {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if scale * half_tail(profile, mid, opts)? > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `(g * f)(x_i)` at the grid nodes (or those inside `opts.window`).
pub fn convolve(
    profile: &dyn RadialProfile,
    f: &GridFunction,
    opts: &ConvolveOptions,
) -> Result<GridFunction> {
    ConvolutionPlan::new(profile, f, opts)?.apply(f, opts.extension)
}

/// Product-integration weights of one kernel on one grid geometry, reusable
/// for every function sampled on that geometry.
pub struct ConvolutionPlan<'a> {
    profile: &'a dyn RadialProfile,
    x0: f64,
    h: f64,
    n: usize,
    interpolation: Interpolation,
    window: Option<(f64, f64)>,
    quad: QuadOptions,
    w0: Vec<f64>,
    w1: Vec<f64>,
}

impl<'a> ConvolutionPlan<'a> {
    /// Weights for the geometry of `template`; its values are not used.
    pub fn new(
        profile: &'a dyn RadialProfile,
        template: &GridFunction,
        opts: &ConvolveOptions,
    ) -> Result<Self> {
        if profile.dim() != 1 || template.dim() != 1 {
            return Err(Error::Dimension(format!(
                "convolution is implemented on the line; got kernel n = {}, grid n = {}",
                profile.dim(),
                template.dim()
            )));
        }
        let n = template.len();
        if n == 0 {
            return Err(Error::Empty("grid function"));
        }
        let h = template.spacing();
        let q = &opts.quad;
        // Breakpoints u_m, relative to the output node, for m in -n..=n.
        let offset = match opts.interpolation {
            Interpolation::Linear => 0.0,
            Interpolation::Constant => -0.5,
        };
        let need_first = opts.interpolation == Interpolation::Linear;
        let ms: Vec<i64> = (-(n as i64)..=(n as i64)).collect();
        let prims = ms
            .par_iter()
            .map(|&m| {
                let u = (m as f64 + offset) * h;
                let g0 = signed_primitive(profile, 0, u, q)?;
                let g1 = if need_first {
                    signed_primitive(profile, 1, u, q)?
                } else {
                    0.0
                };
                Ok((g0, g1))
            })
            .collect::<Result<Vec<_>>>()?;
        if prims.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::Precondition(format!(
                "cumulative integrals of {} are not finite on the grid",
                profile.label()
            )));
        }
        let at = |m: i64| prims[(m + n as i64) as usize];
        // Weights per offset m = j - i: f_j w0[m] + f_{j+1} w1[m].
        let (w0, w1) = (-(n as i64)..(n as i64))
            .map(|m| {
                let (a0, a1) = at(m);
                let (b0, b1) = at(m + 1);
                let mass = b0 - a0;
                if need_first {
                    let first = b1 - a1;
                    let slope = (first - m as f64 * h * mass) / h;
                    (mass - slope, slope)
                } else {
                    (mass, 0.0)
                }
            })
            .unzip();
        Ok(Self {
            profile,
            x0: template.origin()[0],
            h,
            n,
            interpolation: opts.interpolation,
            window: opts.window,
            quad: opts.quad,
            w0,
            w1,
        })
    }

    /// Convolves a function on the planned geometry.
    pub fn apply(&self, f: &GridFunction, extension: Extension) -> Result<GridFunction> {
        let (n, h, x0) = (self.n, self.h, self.x0);
        if f.dim() != 1 || f.len() != n || f.spacing() != h || f.origin()[0] != x0 {
            return Err(Error::Dimension(
                "function does not live on the planned grid".into(),
            ));
        }
        let profile = self.profile;
        let q = &self.quad;
        let vals = f.values();
        let (lo, hi) = self.window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        let outputs: Vec<usize> = (0..n)
            .filter(|&i| {
                let x = x0 + i as f64 * h;
                x >= lo && x <= hi
            })
            .collect();
        if outputs.is_empty() {
            return Err(Error::Empty("output window"));
        }
        let (left_edge, right_edge) = match self.interpolation {
            Interpolation::Linear => (x0, x0 + (n - 1) as f64 * h),
            Interpolation::Constant => (x0 - 0.5 * h, x0 + (n as f64 - 0.5) * h),
        };

        if let Extension::Truncated { tol } = extension {
            let sup = f.sup_norm();
            let first = x0 + outputs[0] as f64 * h;
            let last = x0 + *outputs.last().unwrap() as f64 * h;
            let worst = outputs
                .iter()
                .map(|&i| {
                    let x = x0 + i as f64 * h;
                    Ok(sup
                        * (half_tail(profile, x - left_edge, q)?
                            + half_tail(profile, right_edge - x, q)?))
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            if worst > tol {
                let pad = required_padding(profile, 2.0 * sup, tol, q)?;
                let have = (first - left_edge).min(right_edge - last);
                return Err(Error::InsufficientPadding {
                    correction: worst,
                    tol,
                    required_padding: pad.max(have),
                });
            }
        }

        let need_first = self.interpolation == Interpolation::Linear;
        let w = |v: &Vec<f64>, m: i64| v[(m + n as i64) as usize];
        let edge = |x: f64| -> Result<f64> {
            Ok(match extension {
                Extension::Constant => {
                    vals[0] * half_tail(profile, x - left_edge, q)?
                        + vals[n - 1] * half_tail(profile, right_edge - x, q)?
                }
                _ => 0.0,
            })
        };
        let out = outputs
            .par_iter()
            .map(|&i| {
                let mut acc = 0.0;
                let segments = if need_first { n - 1 } else { n };
                for j in 0..segments {
                    let m = j as i64 - i as i64;
                    acc += vals[j] * w(&self.w0, m);
                    if need_first {
                        acc += vals[j + 1] * w(&self.w1, m);
                    }
                }
                Ok(acc + edge(x0 + i as f64 * h)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        GridFunction::line(x0 + outputs[0] as f64 * h, h, out)
    }
}
