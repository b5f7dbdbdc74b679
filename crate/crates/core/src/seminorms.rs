//! Gagliardo, Nikol'skii and Besov seminorms on intervals, the modulus of
//! smoothness and the two embedding inequalities between them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::function::{Domain1D, RealFn};
use crate::increments::{difference, shrink_domain};
use crate::quadrature::{self, clip_breaks, subdivide, Estimate, PairIntegrator, PairRule, Tolerance};

/// A seminorm value with the increments it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormReport {
    pub name: &'static str,
    pub s: f64,
    pub p: f64,
    pub l: usize,
    pub lambda: f64,
    pub delta: f64,
    pub value: f64,
    /// Shifts `z` sampled (empty for quadrature-only seminorms).
    pub sample_set: Vec<f64>,
    pub quadrature_error: f64,
}

fn check_sp(s: f64, p: f64) -> Result<()> {
    check_range("s", s, s > 0.0, "smoothness must be positive")?;
    check_range("p", p, p >= 1.0 && p.is_finite(), "integrability exponent must be in [1, ∞)")
}

fn check_order(s: f64, l: usize) -> Result<()> {
    check_range("l", l as f64, l as f64 > s, "increment order must exceed s")
}

/// `‖Δ_z^l u‖_{L^p(U_{lz})}`; zero when `U_{lz}` is empty.
pub fn increment_norm(u: &dyn RealFn, dom: Domain1D, z: f64, l: usize, p: f64) -> Estimate {
    let sub = shrink_domain(dom, z, l);
    if sub.is_empty() {
        return Estimate::default();
    }
    let d = difference(u, z, l);
    let breaks = clip_breaks(sub.lo, sub.hi, d.kinks());
    let tol = Tolerance {
        abs: 1e-300,
        rel: 1e-12,
        max_intervals: 200,
    };
    let est = if p == 2.0 {
        quadrature::adaptive_breaks(
            |x| {
                let v = d.eval(x);
                v * v
            },
            &breaks,
            tol,
        )
    } else {
        quadrature::adaptive_breaks(|x| d.eval(x).abs().powf(p), &breaks, tol)
    };
    let value = est.value.max(0.0).powf(1.0 / p);
    let error = if value > 0.0 {
        est.error / (p * value.powf(p - 1.0))
    } else {
        est.error.powf(1.0 / p)
    };
    Estimate::new(value, error)
}

/// Deterministic dyadic shifts `δ·2^{-j/m}` (both signs) plus seeded
/// log-uniform fill-in.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    /// Largest shift; `None` means the diameter of the domain.
    pub delta: Option<f64>,
    pub per_octave: usize,
    pub octaves: usize,
    pub random: usize,
    pub seed: u64,
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder {
            delta: None,
            per_octave: 4,
            octaves: 24,
            random: 32,
            seed: 0x5eed,
        }
    }
}

impl Ladder {
    pub fn with_delta(delta: f64) -> Self {
        Ladder {
            delta: Some(delta),
            ..Default::default()
        }
    }

    pub fn delta_for(&self, dom: Domain1D) -> f64 {
        self.delta.unwrap_or(dom.len())
    }

    /// The doubled ladder: twice the density, one more octave, twice the fill-in.
    pub fn refined(&self) -> Self {
        Ladder {
            per_octave: 2 * self.per_octave,
            octaves: self.octaves + 1,
            random: 2 * self.random,
            ..self.clone()
        }
    }

    pub fn points(&self, dom: Domain1D) -> Vec<f64> {
        let delta = self.delta_for(dom);
        let m = self.per_octave.max(1);
        let n = m * self.octaves;
        let mut out = Vec::with_capacity(2 * (n + 1) + self.random);
        for j in 0..=n {
            let z = delta * 2f64.powf(-(j as f64) / m as f64);
            out.push(z);
            out.push(-z);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let lo = -(self.octaves as f64);
        for _ in 0..self.random {
            let z = delta * 2f64.powf(rng.gen_range(lo..0.0));
            out.push(if rng.gen_bool(0.5) { z } else { -z });
        }
        out
    }
}

/// `sup_z |z|^{-s} ‖Δ_z^l u‖_{L^p(U_{lz})}` over the ladder; a lower bound
/// for the supremum over `0 < |z| < δ`.
pub fn nikolskii(
    u: &dyn RealFn,
    dom: Domain1D,
    s: f64,
    p: f64,
    l: usize,
    ladder: &Ladder,
) -> Result<SeminormReport> {
    check_sp(s, p)?;
    check_order(s, l)?;
    let zs = ladder.points(dom);
    let vals: Vec<(f64, f64)> = zs
        .par_iter()
        .map(|&z| {
            let est = increment_norm(u, dom, z, l, p);
            let w = z.abs().powf(-s);
            (w * est.value, w * est.error)
        })
        .collect();
    let mut value: f64 = 0.0;
    let mut err: f64 = 0.0;
    for (v, e) in vals {
        if v > value {
            value = v;
            err = e;
        }
    }
    Ok(SeminormReport {
        name: "nikolskii",
        s,
        p,
        l,
        lambda: f64::INFINITY,
        delta: ladder.delta_for(dom),
        value,
        sample_set: zs,
        quadrature_error: err,
    })
}

/// Running maximum of `‖Δ_z^l u‖_p` over samples with `|z| ≤ η`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusProfile {
    /// Distinct sampled `|z|`, increasing.
    pub etas: Vec<f64>,
    /// `ω(η_k)`, nondecreasing.
    pub omegas: Vec<f64>,
}

impl ModulusProfile {
    pub fn new(u: &dyn RealFn, dom: Domain1D, p: f64, l: usize, ladder: &Ladder) -> Self {
        let zs = ladder.points(dom);
        let mut samples: Vec<(f64, f64)> = zs
            .par_iter()
            .map(|&z| (z.abs(), increment_norm(u, dom, z, l, p).value))
            .collect();
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut etas: Vec<f64> = Vec::with_capacity(samples.len());
        let mut omegas: Vec<f64> = Vec::with_capacity(samples.len());
        let mut running: f64 = 0.0;
        for (eta, w) in samples {
            running = running.max(w);
            if etas.last() == Some(&eta) {
                *omegas.last_mut().unwrap() = running;
            } else {
                etas.push(eta);
                omegas.push(running);
            }
        }
        ModulusProfile { etas, omegas }
    }

    /// `ω(η)`: right-continuous step function, zero below the smallest sample.
    pub fn at(&self, eta: f64) -> f64 {
        let k = self.etas.partition_point(|&e| e <= eta);
        if k == 0 {
            0.0
        } else {
            self.omegas[k - 1]
        }
    }

    /// `sup_η η^{-s} ω(η)` over `η < below`; attained at sample points.
    pub fn weighted_sup(&self, s: f64, below: f64) -> f64 {
        self.etas
            .iter()
            .zip(&self.omegas)
            .filter(|(e, _)| **e < below)
            .map(|(e, w)| e.powf(-s) * w)
            .fold(0.0, f64::max)
    }

    /// `∫_0^{upper} (η^{-s} ω(η))^p dη/η` for the step function, exactly.
    pub fn weighted_integral(&self, s: f64, p: f64, upper: f64) -> f64 {
        let sp = s * p;
        let mut total = 0.0;
        for (k, (&e, &w)) in self.etas.iter().zip(&self.omegas).enumerate() {
            if e >= upper {
                break;
            }
            if w == 0.0 {
                continue;
            }
            let next = self.etas.get(k + 1).copied().unwrap_or(f64::INFINITY).min(upper);
            let tail = if next.is_infinite() { 0.0 } else { next.powf(-sp) };
            total += w.powf(p) * (e.powf(-sp) - tail) / sp;
        }
        total
    }
}

/// `ω_p^l(u; η)` over the default ladder of `dom`.
pub fn modulus_of_smoothness(u: &dyn RealFn, dom: Domain1D, p: f64, l: usize, eta: f64) -> Result<f64> {
    check_range("eta", eta, eta > 0.0, "radius must be positive")?;
    check_range("p", p, p >= 1.0, "integrability exponent must be at least 1")?;
    Ok(ModulusProfile::new(u, dom, p, l, &Ladder::default()).at(eta))
}

/// `(∫_{|z|<δ} (|z|^{-s} ‖Δ_z^l u‖_{L^p(U_{lz})})^λ dz/|z|)^{1/λ}`; `λ = ∞`
/// gives [`nikolskii`].
pub fn besov(
    u: &dyn RealFn,
    dom: Domain1D,
    s: f64,
    p: f64,
    lambda: f64,
    l: usize,
    delta: Option<f64>,
) -> Result<SeminormReport> {
    check_sp(s, p)?;
    check_order(s, l)?;
    check_range("lambda", lambda, lambda >= 1.0, "third index must be in [1, ∞]")?;
    let delta_v = delta.unwrap_or(dom.len());
    check_range("delta", delta_v, delta_v > 0.0, "restriction radius must be positive")?;
    if lambda.is_infinite() {
        let ladder = Ladder {
            delta,
            ..Default::default()
        };
        return nikolskii(u, dom, s, p, l, &ladder);
    }
    let coarse = radial_integral(u, dom, s, p, lambda, l, delta_v, 8);
    let fine = radial_integral(u, dom, s, p, lambda, l, delta_v, 12);
    let value = fine.powf(1.0 / lambda);
    let other = coarse.powf(1.0 / lambda);
    Ok(SeminormReport {
        name: "besov",
        s,
        p,
        l,
        lambda,
        delta: delta_v,
        value,
        sample_set: Vec::new(),
        quadrature_error: (value - other).abs(),
    })
}

/// Bound on `|full - restricted|` for the `λ = p` Besov form.
pub fn restriction_bound(u: &dyn RealFn, dom: Domain1D, s: f64, p: f64, l: usize, delta: f64) -> f64 {
    let breaks = clip_breaks(dom.lo, dom.hi, u.kinks());
    let lp = quadrature::adaptive_breaks(|x| u.eval(x).abs().powf(p), &breaks, Tolerance::relative(1e-12))
        .value
        .powf(1.0 / p);
    2f64.powi(l as i32) * (2.0 / (s * p)).powf(1.0 / p) * delta.powf(-s) * lp
}

// 2 ∫_0^δ (z^{-s} N(z))^λ dz/z with Gauss panels in log z. Both signs of z
// contribute equally on an interval.
#[allow(clippy::too_many_arguments)]
fn radial_integral(
    u: &dyn RealFn,
    dom: Domain1D,
    s: f64,
    p: f64,
    lambda: f64,
    l: usize,
    delta: f64,
    order: usize,
) -> f64 {
    let top = delta.min(dom.len() / l as f64);
    if top <= 0.0 {
        return 0.0;
    }
    let g = |z: f64| {
        let n = increment_norm(u, dom, z, l, p).value;
        if n == 0.0 {
            0.0
        } else {
            (z.powf(-s) * n).powf(lambda)
        }
    };
    // non-smooth points of N: kink separations divided by 1..l
    let mut kinks = clip_breaks(dom.lo, dom.hi, u.kinks());
    if kinks.len() > 256 {
        kinks = vec![dom.lo, dom.hi];
    }
    let mut zb = Vec::new();
    for (i, a) in kinks.iter().enumerate() {
        for b in &kinks[i + 1..] {
            for m in 1..=l {
                zb.push((b - a) / m as f64);
            }
        }
    }
    let breaks = clip_breaks(0.0, top, zb);
    let first = breaks[1];
    let mut log_breaks = Vec::with_capacity(4 * breaks.len());
    for w in breaks[1..].windows(2) {
        let pieces = ((w[1] / w[0]).log2().ceil().max(1.0)) as usize;
        let step = (w[1] / w[0]).powf(1.0 / pieces as f64);
        for j in 0..pieces {
            log_breaks.push((w[0] * step.powi(j as i32)).ln());
        }
    }
    log_breaks.push(top.ln());
    let rule = quadrature::gauss_legendre(order);
    let panel = |a: f64, b: f64| -> f64 {
        rule.mapped(a, b).map(|(v, w)| w * g(v.exp())).sum()
    };
    let pieces: Vec<f64> = log_breaks
        .par_windows(2)
        .map(|w| panel(w[0], w[1]))
        .collect();
    let mut total: f64 = pieces.iter().sum();
    // octaves below the first break until they stop contributing
    let mut hi = first;
    for _ in 0..40 {
        let lo = 0.5 * hi;
        let part = panel(lo.ln(), hi.ln());
        total += part;
        hi = lo;
        if part <= 1e-15 * total {
            break;
        }
    }
    let (g0, g1) = (g(hi), g(2.0 * hi));
    if g0 > 1e-14 * total {
        let gamma = (g1 / g0).log2();
        if gamma <= 0.0 {
            return f64::INFINITY;
        }
        total += g0 / gamma;
    }
    2.0 * total
}

/// `[u]_{W^{σ,p}(U)}` by panel-pair quadrature in `(x, t = y - x)`.
pub fn gagliardo(u: &dyn RealFn, dom: Domain1D, sigma: f64, p: f64) -> Result<SeminormReport> {
    gagliardo_with(u, dom, sigma, p, PairRule::default())
}

pub fn gagliardo_with(
    u: &dyn RealFn,
    dom: Domain1D,
    sigma: f64,
    p: f64,
    rule: PairRule,
) -> Result<SeminormReport> {
    check_range("sigma", sigma, sigma > 0.0 && sigma < 1.0, "order must lie in (0, 1)")?;
    check_range("p", p, p >= 1.0 && p.is_finite(), "integrability exponent must be in [1, ∞)")?;
    let report = |value: f64, err: f64| SeminormReport {
        name: "gagliardo",
        s: sigma,
        p,
        l: 1,
        lambda: p,
        delta: dom.len(),
        value,
        sample_set: Vec::new(),
        quadrature_error: err,
    };
    if dom.is_empty() {
        return Ok(report(0.0, 0.0));
    }
    let breaks = subdivide(&clip_breaks(dom.lo, dom.hi, u.kinks()), dom.len() / 32.0);
    let power = -1.0 - sigma * p;
    let g = |x: f64, t: f64| {
        let d = (u.eval(x) - u.eval(x + t)).abs();
        [if d == 0.0 { 0.0 } else { d.powf(p) * t.abs().powf(power) }]
    };
    let exponent = p - 1.0 - sigma * p;
    let [coarse] = PairIntegrator::new(rule, exponent).over_square(&breaks, &g);
    let [fine] = PairIntegrator::new(rule.refined(), exponent).over_square(&breaks, &g);
    let value = fine.max(0.0).powf(1.0 / p);
    let err = (value - coarse.max(0.0).powf(1.0 / p)).abs();
    Ok(report(value, err))
}

/// `[u]_{W^{σ,p}(U)}` through `∫_ℝ |z|^{-1-σp} ‖Δ_z u‖^p_{L^p(U_z)} dz`.
pub fn gagliardo_shifted(u: &dyn RealFn, dom: Domain1D, sigma: f64, p: f64) -> Result<SeminormReport> {
    check_range("sigma", sigma, sigma > 0.0 && sigma < 1.0, "order must lie in (0, 1)")?;
    let mut rep = besov(u, dom, sigma, p, p, 1, None)?;
    rep.name = "gagliardo-shifted";
    Ok(rep)
}

/// Both sides of an embedding inequality evaluated on one modulus profile.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE
}

/// `sup_t t^{-s} ω(t) ≤ (sp)^{1/p} (∫_0^∞ (η^{-s} ω(η))^p dη/η)^{1/p}`.
pub fn embed_w_in_n(profile: &ModulusProfile, s: f64, p: f64) -> Result<EmbeddingCheck> {
    check_sp(s, p)?;
    let constant = (s * p).powf(1.0 / p);
    let lhs = profile.weighted_sup(s, f64::INFINITY);
    let rhs = constant * profile.weighted_integral(s, p, f64::INFINITY).powf(1.0 / p);
    Ok(EmbeddingCheck {
        lhs,
        rhs,
        constant,
        holds: holds(lhs, rhs),
    })
}

/// `(∫_0^1 (η^{-r} ω(η))^p dη/η)^{1/p} ≤ [(s-r)p]^{-1/p} sup_{η<1} η^{-s} ω(η)`.
pub fn embed_n_in_w(profile: &ModulusProfile, s: f64, r: f64, p: f64) -> Result<EmbeddingCheck> {
    check_sp(s, p)?;
    if s == r {
        return Err(Error::DegenerateGap(s));
    }
    check_range("r", r, r > 0.0 && r < s, "need 0 < r < s")?;
    let constant = ((s - r) * p).powf(-1.0 / p);
    let lhs = profile.weighted_integral(r, p, 1.0).powf(1.0 / p);
    let rhs = constant * profile.weighted_sup(s, 1.0);
    Ok(EmbeddingCheck {
        lhs,
        rhs,
        constant,
        holds: holds(lhs, rhs),
    })
}

/// Convenience wrapper building the default profile for `u`.
pub fn embed_w_in_n_for(u: &dyn RealFn, dom: Domain1D, s: f64, p: f64, l: usize) -> Result<EmbeddingCheck> {
    check_order(s, l)?;
    embed_w_in_n(&ModulusProfile::new(u, dom, p, l, &Ladder::default()), s, p)
}

pub fn embed_n_in_w_for(
    u: &dyn RealFn,
    dom: Domain1D,
    s: f64,
    r: f64,
    p: f64,
    l: usize,
) -> Result<EmbeddingCheck> {
    check_order(s, l)?;
    embed_n_in_w(&ModulusProfile::new(u, dom, p, l, &Ladder::default()), s, r, p)
}
