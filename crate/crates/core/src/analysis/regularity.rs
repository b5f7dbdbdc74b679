//! Interior estimates for computed solutions: the Caccioppoli-type bound and
//! empirical Nikol'skii exponents.

use crate::error::{check_range, Error, Result};
use crate::function::{Domain1D, GridFunction, RealFn};
use crate::kernels::{weighted_l1_norm, KernelSpec, Weight};
use crate::quadrature::{self, clip_breaks, Tolerance};
use crate::seminorms::{gagliardo, increment_norm};
use crate::solver::Rhs;

#[derive(Debug, Clone, PartialEq)]
pub struct CaccioppoliReport {
    /// `[u]_{H^s(B_r(x0))}`
    pub lhs: f64,
    /// `‖u‖_{L²(Ω)}`, `‖u‖_{L¹_{x0,β}(ℝ)}`, `‖f‖_{L²(Ω)}`
    pub rhs_terms: [f64; 3],
    pub ratio: f64,
}

fn l2_norm(f: &dyn RealFn, dom: Domain1D) -> f64 {
    let breaks = clip_breaks(dom.lo, dom.hi, f.kinks());
    quadrature::adaptive_breaks(|x| f.eval(x).powi(2), &breaks, Tolerance::relative(1e-11))
        .value
        .sqrt()
}

/// Both sides of `[u]_{H^s(B_r)} ≤ C (‖u‖_{L²(Ω)} + ‖u‖_{L¹_β} + ‖f‖_{L²(Ω)})`.
pub fn caccioppoli_check(
    u: &GridFunction,
    f: &Rhs,
    omega: Domain1D,
    x0: f64,
    r: f64,
    k: &KernelSpec,
) -> Result<CaccioppoliReport> {
    check_range("r", r, r > 0.0, "radius must be positive")?;
    if !(x0 - r > omega.lo && x0 + r < omega.hi) {
        return Err(Error::BallNotCompactlyContained {
            x0,
            r,
            lo: omega.lo,
            hi: omega.hi,
        });
    }
    let ball = Domain1D::new(x0 - r, x0 + r)?;
    let lhs = gagliardo(u, ball, k.s, 2.0)?.value;
    let terms = [
        l2_norm(u, omega),
        weighted_l1_norm(u, &Weight::new(x0, k.beta)?)?,
        l2_norm(f, omega),
    ];
    let total: f64 = terms.iter().sum();
    let ratio = if total > 0.0 { lhs / total } else { 0.0 };
    Ok(CaccioppoliReport {
        lhs,
        rhs_terms: terms,
        ratio,
    })
}

/// Least-squares line through `(xs, ys)`: slope, intercept and RMS residual.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// `(z, ‖Δ_z^l u‖)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
}

/// Slope of `log ‖Δ_z^l u‖_{L^p(Ω'_{lz})}` against `log z` on the dyadic
/// ladder `z = z_max 2^{-j} ≥ z_min`.
pub fn fit_regularity_exponent(
    u: &dyn RealFn,
    omega_prime: Domain1D,
    l: usize,
    p: f64,
    window: (f64, f64),
) -> Result<ExponentFit> {
    let (z_min, z_max) = window;
    check_range("z_min", z_min, z_min > 0.0, "window must be positive")?;
    check_range(
        "z_max",
        z_max,
        z_max >= z_min && l as f64 * z_max < omega_prime.len(),
        "window must fit inside the subdomain",
    )?;
    let mut zs = Vec::new();
    let mut z = z_max;
    while z >= z_min * (1.0 - 1e-12) {
        zs.push(z);
        z *= 0.5;
    }
    if zs.len() < 4 {
        return Err(Error::WindowTooNarrow(zs.len()));
    }
    let points: Vec<(f64, f64)> = zs
        .iter()
        .map(|&z| (z, increment_norm(u, omega_prime, z, l, p).value))
        .collect();
    let xs: Vec<f64> = points.iter().map(|(z, _)| z.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, n)| n.ln()).collect();
    let (slope, intercept, residual) = linear_fit(&xs, &ys);
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
        window,
        samples: points.len(),
        points,
    })
}
