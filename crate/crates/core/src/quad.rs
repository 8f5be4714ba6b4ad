//! Numerical integration: adaptive Gauss-Kronrod on finite and half-infinite
//! intervals, Wynn's epsilon algorithm, and a lobe-by-lobe scheme for
//! Fourier-type integrals over the half line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances for [`integrate`] and friends.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One 15-point Kronrod panel on `[a, b]`: (integral, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let err = rescale_error(
        (res_k - res_g) * half,
        res_abs * half.abs(),
        res_asc * half.abs(),
    );
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Like [`integrate`], but the initial partition is given by `points`
/// (sorted, at least two entries). Use it to put kinks or scale changes on
/// panel edges.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::Empty("integration breakpoints"));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (value, error) = gk15(&f, a, b);
        evaluations += 15;
        total += value;
        total_err += error;
        heap.push(Panel { a, b, value, error });
    }
    let mut subdivisions = heap.len();
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                value: total,
                error: total_err,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted floating-point resolution; keep its estimate.
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }
    // Re-sum to shed the drift of incremental updates.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

/// Integrates `f` over `[a, inf)` through the map `t = a + u / (1 - u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - u;
        let t = a + u / one_minus;
        let v = f(t) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_with_breaks(g, &[0.0, 0.5, 0.9, 0.99, 0.999, 1.0], opts)
}

/// Geometric breakpoints `scale * 10^k` inside `(lo, hi)`, with the ends.
pub fn geometric_breaks(lo: f64, hi: f64, scale: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    if scale > 0.0 {
        for k in -12..=12 {
            let p = scale * 10f64.powi(k);
            if p > lo && p < hi {
                pts.push(p);
            }
        }
    }
    pts.push(hi);
    pts
}

/// Wynn's epsilon algorithm on a sequence of partial sums. Returns the
/// extrapolated limit and an error estimate (spread of the last two entries in
/// the chosen even column).
pub fn wynn_epsilon(partial_sums: &[f64]) -> Option<(f64, f64)> {
    let n = partial_sums.len();
    if n < 3 {
        return None;
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur = partial_sums.to_vec();
    let mut best = (
        partial_sums[n - 1],
        (partial_sums[n - 1] - partial_sums[n - 2]).abs(),
    );
    let mut column = 0usize;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 || !diff.is_finite() {
                // Column has converged exactly at this depth.
                if column.is_multiple_of(2) {
                    return Some((cur[i + 1], best.1.min(f64::EPSILON * cur[i + 1].abs())));
                }
                return Some(best);
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        column += 1;
        if column.is_multiple_of(2) && next.len() >= 2 {
            let m = next.len();
            let est = next[m - 1];
            let err = (next[m - 1] - next[m - 2]).abs();
            if est.is_finite() && err < best.1 {
                best = (est, err);
            }
        }
        prev = cur;
        cur = next;
    }
    Some(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// Controls for [`fourier_half_line`].
#[derive(Debug, Clone, Copy)]
pub struct OscillatoryOptions {
    /// Absolute and relative tolerance per lobe.
    pub lobe_abs_tol: f64,
    pub lobe_rel_tol: f64,
    /// Tolerance on the (possibly accelerated) sum.
    pub sum_abs_tol: f64,
    pub sum_rel_tol: f64,
    /// Lobes summed before acceleration is attempted.
    pub min_lobes: usize,
    pub max_lobes: usize,
    /// Number of trailing partial sums fed to the epsilon algorithm.
    pub window: usize,
}

impl Default for OscillatoryOptions {
    fn default() -> Self {
        Self {
            lobe_abs_tol: 1e-15,
            lobe_rel_tol: 1e-12,
            sum_abs_tol: 1e-13,
            sum_rel_tol: 1e-11,
            min_lobes: 8,
            max_lobes: 20_000,
            window: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryResult {
    pub value: f64,
    pub error: f64,
    pub lobes: usize,
    pub accelerated: bool,
}

/// Computes `int_0^inf g(s) trig(s) ds` by integrating over the half periods
/// between consecutive zeros of `trig` and summing the resulting alternating
/// series, with epsilon acceleration once the series is long enough.
///
/// `envelope(s)` must bound `|g|` on `[s, inf)`; the direct sum stops once
/// twice the envelope is below tolerance. `first_breaks` are extra panel edges
/// used inside the first lobe, where `g` may vary on scales much shorter
/// than a half period.
pub fn fourier_half_line<G, E>(
    g: G,
    trig: Trig,
    envelope: E,
    first_breaks: &[f64],
    opts: &OscillatoryOptions,
) -> Result<OscillatoryResult>
where
    G: Fn(f64) -> f64,
    E: Fn(f64) -> f64,
{
    let integrand = |s: f64| match trig {
        Trig::Cos => g(s) * s.cos(),
        Trig::Sin => g(s) * s.sin(),
    };
    let zero = |k: usize| match trig {
        Trig::Cos => (k as f64 + 0.5) * std::f64::consts::PI,
        Trig::Sin => (k as f64 + 1.0) * std::f64::consts::PI,
    };
    let lobe_opts = QuadOptions {
        abs_tol: opts.lobe_abs_tol,
        rel_tol: opts.lobe_rel_tol,
        max_subdivisions: 4000,
    };

    let z0 = zero(0);
    let mut pts = vec![0.0];
    pts.extend(first_breaks.iter().copied().filter(|&b| b > 0.0 && b < z0));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.push(z0);
    let first = integrate_with_breaks(integrand, &pts, &lobe_opts)?;

    let mut partial = Vec::with_capacity(256);
    let mut sum = first.value;
    let mut quad_err = first.error;
    partial.push(sum);
    let mut last_estimate: Option<f64> = None;
    let mut last_change = f64::INFINITY;

    for k in 0..opts.max_lobes {
        let (a, b) = (zero(k), zero(k + 1));
        let tail_bound = 2.0 * envelope(a);
        let tol = opts.sum_abs_tol.max(opts.sum_rel_tol * sum.abs());
        if tail_bound <= tol {
            return Ok(OscillatoryResult {
                value: sum,
                error: tail_bound + quad_err,
                lobes: k + 1,
                accelerated: false,
            });
        }
        let lobe = integrate(integrand, a, b, &lobe_opts)?;
        sum += lobe.value;
        quad_err += lobe.error;
        partial.push(sum);

        if partial.len() >= opts.min_lobes {
            let start = partial.len().saturating_sub(opts.window);
            if let Some((est, est_err)) = wynn_epsilon(&partial[start..]) {
                let tol = opts.sum_abs_tol.max(opts.sum_rel_tol * est.abs());
                if let Some(prev) = last_estimate {
                    last_change = (est - prev).abs();
                    if last_change <= tol && est_err <= 10.0 * tol.max(last_change) {
                        return Ok(OscillatoryResult {
                            value: est,
                            error: last_change.max(est_err) + quad_err,
                            lobes: k + 2,
                            accelerated: true,
                        });
                    }
                }
                last_estimate = Some(est);
            }
        }
    }
    Err(Error::AccelerationNonConvergence {
        lobes: opts.max_lobes,
        last_partial: sum,
        last_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk_polynomial_exact() {
        let r = integrate(
            |x| x.powi(5) - 3.0 * x * x,
            -1.0,
            2.0,
            &QuadOptions::default(),
        )
        .unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn half_line_exponential() {
        let r = integrate_to_infinity(|t| (-t).exp(), 0.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
        let r =
            integrate_to_infinity(|t| 1.0 / (1.0 + t * t), 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn weak_endpoint_singularity() {
        let r = integrate(
            |x| 1.0 / x.sqrt(),
            0.0,
            1.0,
            &QuadOptions::with_tol(1e-10, 1e-10),
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn nonconvergence_reports_estimate() {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_subdivisions: 3,
        };
        match integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, &opts) {
            Err(Error::QuadratureNonConvergence { error, .. }) => assert!(error > 0.0),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn wynn_accelerates_alternating_harmonic() {
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=15)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        let (est, _) = wynn_epsilon(&sums).unwrap();
        assert!((est - 2f64.ln()).abs() < 1e-9, "{est}");
    }

    #[test]
    fn fourier_cauchy_and_gauss() {
        let opts = OscillatoryOptions::default();
        // int_0^inf e^{-t} cos(rho t) dt = 1/(1+rho^2), written in s = rho t.
        for &rho in &[0.1, 1.0, 7.0, 50.0] {
            let r = fourier_half_line(
                |s| (-s / rho).exp() / rho,
                Trig::Cos,
                |s| (-s / rho).exp() / rho,
                &[],
                &opts,
            )
            .unwrap();
            assert!(
                (r.value - 1.0 / (1.0 + rho * rho)).abs() < 1e-12,
                "rho={rho}: {r:?}"
            );
        }
        // int_0^inf e^{-t} sin(t) dt = 1/2
        let r = fourier_half_line(|s| (-s).exp(), Trig::Sin, |s| (-s).exp(), &[], &opts).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }
}
