//! Quadrature primitives shared by every module.
//!
//! Three layers:
//! * fixed Gauss-Legendre rules (cached per order),
//! * a globally adaptive Gauss-Kronrod (7/15) integrator for 1D integrands
//!   with algebraic endpoint singularities,
//! * a panel-pair integrator for double integrals of symmetric integrands
//!   `G(x, y)` that blow up like `|x - y|^e` on the diagonal. Pairs of panels
//!   that touch are integrated in the coordinates `(x, t = y - x)` with a
//!   geometric mesh toward `t = 0` and a power-law model for the last piece.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// A quadrature result with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Self) -> Self {
        Estimate::new(self.value + rhs.value, self.error + rhs.error)
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Self {
        iter.fold(Estimate::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-13,
            rel: 1e-11,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance {
            rel,
            ..Default::default()
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(n: usize) -> GaussRule {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * x * p2 - (jf - 1.0) * p3) / jf;
                }
                dp = nf * (x * p1 - p2) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

const MAX_CACHED_ORDER: usize = 64;

/// Cached Gauss-Legendre rule of order `n` (1 ≤ n ≤ 64).
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    static CACHE: [OnceLock<GaussRule>; MAX_CACHED_ORDER + 1] =
        [const { OnceLock::new() }; MAX_CACHED_ORDER + 1];
    assert!(
        (1..=MAX_CACHED_ORDER).contains(&n),
        "Gauss order {n} not supported"
    );
    CACHE[n].get_or_init(|| GaussRule::compute(n))
}

/// Sum of `n`-point Gauss rules over consecutive breakpoints.
pub fn gauss_panels<F: FnMut(f64) -> f64>(breaks: &[f64], n: usize, mut f: F) -> f64 {
    let rule = gauss_legendre(n);
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Geometric breakpoints `a, a + L 2^{-levels}, ..., a + L/2, b` refining toward `a`.
/// Levels finer than the spacing of floats near `a` are dropped.
pub fn geometric_toward_left(a: f64, b: f64, levels: usize) -> Vec<f64> {
    let len = b - a;
    let floor = 256.0 * f64::EPSILON * a.abs();
    let mut pts = Vec::with_capacity(levels + 2);
    pts.push(a);
    for k in (1..=levels).rev() {
        let step = len * 0.5f64.powi(k as i32);
        if step > floor {
            pts.push(a + step);
        }
    }
    pts.push(b);
    pts
}

/// Gauss panels graded geometrically toward `a`; the piece `[a, a + L 2^{-levels}]`
/// is integrated with the same rule (useful when the integrand is integrable
/// but not smooth at `a`).
pub fn graded_left<F: FnMut(f64) -> f64>(a: f64, b: f64, levels: usize, n: usize, f: F) -> f64 {
    gauss_panels(&geometric_toward_left(a, b, levels), n, f)
}

/// Gauss panels graded toward both endpoints.
pub fn graded_both<F: FnMut(f64) -> f64>(a: f64, b: f64, levels: usize, n: usize, mut f: F) -> f64 {
    let mid = 0.5 * (a + b);
    graded_left(a, mid, levels, n, &mut f) + graded_left(-b, -mid, levels, n, |x| f(-x))
}

// Gauss-Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Estimate::new(kron * h, ((kron - gauss) * h).abs())
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive Gauss-Kronrod integration over `[a, b]`.
///
/// Returns the best estimate even when the tolerance is not met; use
/// [`adaptive_strict`] to turn that into an error.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    if !(b > a) {
        return Estimate::default();
    }
    let first = gk15(&mut f, a, b);
    let mut total = first;
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, est: first });
    let mut count = 1;
    while total.error > tol.abs.max(tol.rel * total.value.abs()) && count < tol.max_intervals {
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            // interval exhausted at machine resolution
            heap.push(Interval {
                est: Estimate::new(worst.est.value, 0.0),
                ..worst
            });
            total.error -= worst.est.error;
            continue;
        }
        let left = gk15(&mut f, worst.a, m);
        let right = gk15(&mut f, m, worst.b);
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        heap.push(Interval {
            a: worst.a,
            b: m,
            est: left,
        });
        heap.push(Interval {
            a: m,
            b: worst.b,
            est: right,
        });
        count += 1;
    }
    // recompute sums to shed accumulated cancellation
    let (v, e) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), iv| (v + iv.est.value, e + iv.est.error));
    Estimate::new(v, e)
}

/// Like [`adaptive`] but fails with `QuadratureFailure` when the tolerance is
/// not reached.
pub fn adaptive_strict<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    let est = adaptive(f, a, b, tol);
    if est.error > 100.0 * tol.abs.max(tol.rel * est.value.abs()) || !est.value.is_finite() {
        return Err(Error::QuadratureFailure {
            lo: a,
            hi: b,
            error: est.error,
        });
    }
    Ok(est)
}

/// Adaptive integration split at the given interior breakpoints.
pub fn adaptive_breaks<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> Estimate {
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| adaptive(&mut f, w[0], w[1], tol))
        .sum()
}

/// `∫_a^∞ f` through the substitution `x = a / τ` (`a > 0`), adaptive in τ.
pub fn adaptive_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Estimate {
    assert!(a > 0.0);
    adaptive(
        |tau: f64| {
            let x = a / tau;
            f(x) * a / (tau * tau)
        },
        0.0,
        1.0,
        tol,
    )
}

/// Splits every panel longer than `max_width` into equal pieces.
pub fn subdivide(breaks: &[f64], max_width: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        let pieces = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
        for j in 0..pieces {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / pieces as f64);
        }
    }
    if let Some(&last) = breaks.last() {
        out.push(last);
    }
    out
}

/// Sorted, deduplicated breakpoints in `[a, b]` including both ends.
pub fn clip_breaks(a: f64, b: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let scale = (b - a).abs().max(1e-300);
    let mut pts: Vec<f64> = interior
        .into_iter()
        .filter(|&x| x > a && x < b)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * scale);
    if let Some(last) = pts.last_mut() {
        *last = b;
    }
    pts[0] = a;
    pts
}

/// Resolution controls for [`PairIntegrator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRule {
    /// Gauss order along `t` on each geometric panel.
    pub t_order: usize,
    /// Gauss order along `x` for fixed `t`.
    pub x_order: usize,
    /// Gauss order per direction for well-separated panels.
    pub far_order: usize,
    /// Number of halvings toward the diagonal.
    pub levels: usize,
}

impl Default for PairRule {
    fn default() -> Self {
        PairRule {
            t_order: 8,
            x_order: 6,
            far_order: 8,
            levels: 30,
        }
    }
}

impl PairRule {
    /// A rule with every order and the grading depth increased.
    pub fn refined(self) -> Self {
        PairRule {
            t_order: self.t_order + 4,
            x_order: self.x_order + 4,
            far_order: self.far_order + 4,
            levels: self.levels + 10,
        }
    }
}

#[inline]
fn axpy<const N: usize>(acc: &mut [f64; N], w: f64, v: &[f64; N]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += w * b;
    }
}

/// Integrates symmetric, diagonally singular integrands over pairs of panels.
///
/// The integrand is supplied as `g(x, t)` evaluating `G(x, x + t)`; passing `t`
/// separately keeps the kernel's dependence on `|x - y|` exact when `t` is tiny.
/// `exponent` is the power `e > -1` with `G(x, x + t) ~ |t|^e` as `t → 0`.
#[derive(Debug, Clone, Copy)]
pub struct PairIntegrator {
    pub rule: PairRule,
    pub exponent: f64,
}

impl PairIntegrator {
    pub fn new(rule: PairRule, exponent: f64) -> Self {
        assert!(exponent > -1.0, "diagonal singularity must be integrable");
        PairIntegrator { rule, exponent }
    }

    /// `∫_P ∫_P G` over the square of one panel.
    pub fn same<const N: usize, G>(&self, p0: f64, p1: f64, g: &G) -> [f64; N]
    where
        G: Fn(f64, f64) -> [f64; N],
    {
        let len = p1 - p0;
        let xr = gauss_legendre(self.rule.x_order);
        let inner = |t: f64| -> [f64; N] {
            let mut acc = [0.0; N];
            for (x, w) in xr.mapped(p0, p1 - t) {
                axpy(&mut acc, w, &g(x, t));
            }
            acc
        };
        let mut total = self.graded_t(0.0, len, &inner, self.exponent);
        for v in total.iter_mut() {
            *v *= 2.0;
        }
        total
    }

    /// `∫_P ∫_Q G(x, y) dy dx` for panels with `P` left of `Q` (they may touch).
    pub fn pair<const N: usize, G>(&self, p: (f64, f64), q: (f64, f64), g: &G) -> [f64; N]
    where
        G: Fn(f64, f64) -> [f64; N],
    {
        let (p0, p1) = p;
        let (q0, q1) = q;
        debug_assert!(q0 >= p1 - 1e-12 * (q1 - p0));
        let gap = (q0 - p1).max(0.0);
        let longest = (p1 - p0).max(q1 - q0);
        if gap >= 2.0 * longest {
            return self.tensor(p, q, g);
        }
        let xr = gauss_legendre(self.rule.x_order);
        let inner = |t: f64| -> [f64; N] {
            let lo = p0.max(q0 - t);
            let hi = p1.min(q1 - t);
            let mut acc = [0.0; N];
            if hi > lo {
                for (x, w) in xr.mapped(lo, hi) {
                    axpy(&mut acc, w, &g(x, t));
                }
            }
            acc
        };
        let t_lo = gap;
        let t_hi = q1 - p0;
        let mut kinks = vec![q0 - p0, q1 - p1];
        kinks.retain(|&k| k > t_lo && k < t_hi);
        kinks.sort_by(f64::total_cmp);
        let mut pts = vec![t_lo];
        pts.extend(kinks);
        pts.push(t_hi);
        let mut total = [0.0; N];
        let rule = gauss_legendre(self.rule.t_order);
        for (k, w) in pts.windows(2).enumerate() {
            let part = if k == 0 {
                // x-range length vanishes linearly at t_lo when panels touch
                self.graded_t(w[0], w[1], &inner, self.exponent + 1.0)
            } else {
                let mut acc = [0.0; N];
                for (t, wt) in rule.mapped(w[0], w[1]) {
                    axpy(&mut acc, wt, &inner(t));
                }
                acc
            };
            axpy(&mut total, 1.0, &part);
        }
        total
    }

    /// `∫_D ∫_D G` over `D = [breaks[0], breaks[last]]` for a symmetric
    /// integrand that is smooth off the diagonal inside each panel pair.
    /// Panel pairs are evaluated in parallel and summed in a fixed order.
    pub fn over_square<const N: usize, G>(&self, breaks: &[f64], g: &G) -> [f64; N]
    where
        G: Fn(f64, f64) -> [f64; N] + Sync,
    {
        use rayon::prelude::*;
        let np = breaks.len().saturating_sub(1);
        let rows: Vec<[f64; N]> = (0..np)
            .into_par_iter()
            .map(|i| {
                let p = (breaks[i], breaks[i + 1]);
                let mut acc = self.same(p.0, p.1, g);
                for j in i + 1..np {
                    let part = self.pair(p, (breaks[j], breaks[j + 1]), g);
                    axpy(&mut acc, 2.0, &part);
                }
                acc
            })
            .collect();
        let mut total = [0.0; N];
        for r in &rows {
            axpy(&mut total, 1.0, r);
        }
        total
    }

    /// Tensor Gauss rule on `P × Q` for integrands without diagonal singularity.
    pub fn tensor_panels<const N: usize, G>(&self, xb: &[f64], yb: &[f64], g: &G) -> [f64; N]
    where
        G: Fn(f64, f64) -> [f64; N],
    {
        let mut acc = [0.0; N];
        for p in xb.windows(2).filter(|w| w[1] > w[0]) {
            for q in yb.windows(2).filter(|w| w[1] > w[0]) {
                let part = self.tensor((p[0], p[1]), (q[0], q[1]), g);
                axpy(&mut acc, 1.0, &part);
            }
        }
        acc
    }

    fn tensor<const N: usize, G>(&self, p: (f64, f64), q: (f64, f64), g: &G) -> [f64; N]
    where
        G: Fn(f64, f64) -> [f64; N],
    {
        let rule = gauss_legendre(self.rule.far_order);
        let mut acc = [0.0; N];
        for (x, wx) in rule.mapped(p.0, p.1) {
            for (y, wy) in rule.mapped(q.0, q.1) {
                axpy(&mut acc, wx * wy, &g(x, y - x));
            }
        }
        acc
    }

    /// `∫_{t0}^{t1} H(t) dt` with geometric panels toward `t0`. When `t0 = 0`
    /// the last piece `[0, t_min]` uses `H(t) ≈ H(t_min) (t / t_min)^alpha`.
    /// For `t0 > 0` grading stops once panels reach the scale of `t0`.
    fn graded_t<const N: usize, H>(&self, t0: f64, t1: f64, h: &H, alpha: f64) -> [f64; N]
    where
        H: Fn(f64) -> [f64; N],
    {
        let rule = gauss_legendre(self.rule.t_order);
        let len = t1 - t0;
        let mut total = [0.0; N];
        let mut hi = t1;
        let mut width = len;
        for _ in 0..self.rule.levels {
            width *= 0.5;
            let lo = t0 + width;
            for (t, w) in rule.mapped(lo, hi) {
                axpy(&mut total, w, &h(t));
            }
            hi = lo;
            if t0 > 0.0 && width < 0.25 * t0 {
                break;
            }
        }
        if t0 > 0.0 {
            for (t, w) in rule.mapped(t0, hi) {
                axpy(&mut total, w, &h(t));
            }
        } else {
            let tail = h(hi);
            axpy(&mut total, hi / (alpha + 1.0), &tail);
        }
        total
    }
}
