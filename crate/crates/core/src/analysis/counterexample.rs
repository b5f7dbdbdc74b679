//! The boundary counterexample `u_s(x) = (x_n)_+^s`: harmonicity of its profile
//! `μ_s(t) = t_+^s` on the half-line and blow-up of the truncated energy of `μ_s'`.

use crate::error::{check_range, Result};
use crate::function::Analytic;
use crate::quadrature::{Estimate, PairIntegrator, PairRule};

use super::pv::{pointwise_frac_laplacian, varpi_constant};
use super::regularity::linear_fit;

/// Points where `(-Δ)^s μ_s` is evaluated.
pub const HARMONICITY_POINTS: [f64; 3] = [0.5, 1.0, 2.0];

fn check_s(s: f64) -> Result<()> {
    check_range("s", s, (0.5..1.0).contains(&s), "order must lie in [1/2, 1)")
}

/// `E(ε) = ∫_ε^1 ∫_ε^1 |μ_s'(t) - μ_s'(r)|² |t - r|^{-(4s-1)} dt dr`.
pub fn truncated_energy(s: f64, eps: f64, rule: PairRule) -> Result<f64> {
    check_s(s)?;
    check_range("eps", eps, eps > 0.0 && eps < 1.0, "cutoff must lie in (0, 1)")?;
    // half-octave panels: μ_s' varies on the scale of its argument
    let mut breaks = vec![eps];
    let ratio = std::f64::consts::SQRT_2;
    while breaks.last().unwrap() * ratio < 1.0 - 1e-12 {
        let next = breaks.last().unwrap() * ratio;
        breaks.push(next);
    }
    breaks.push(1.0);
    let sm1 = s - 1.0;
    let kexp = 1.0 - 4.0 * s;
    let g = |x: f64, t: f64| -> [f64; 1] {
        let diff = s * x.powf(sm1) * (sm1 * (t / x).ln_1p()).exp_m1();
        [diff * diff * t.powf(kexp)]
    };
    let integ = PairIntegrator::new(rule, 3.0 - 4.0 * s);
    Ok(integ.over_square(&breaks, &g)[0])
}

/// The dyadic cutoffs `2^{-16}, ..., 2^{-40}`; shallower ladders are still
/// pre-asymptotic for `s` near `1/2`.
pub fn default_epsilons() -> Vec<f64> {
    (16..=40).map(|k| 2f64.powi(-k)).collect()
}

/// `E(ε)` with the difference against a refined rule as error estimate.
pub fn truncated_energy_estimate(s: f64, eps: f64) -> Result<Estimate> {
    let rule = PairRule::default();
    let coarse = truncated_energy(s, eps, rule)?;
    let fine = truncated_energy(s, eps, rule.refined())?;
    Ok(Estimate::new(fine, (fine - coarse).abs()))
}

/// `s²(1-s)/4 ∫_ε^1 t^{-2s} dt`.
pub fn lower_bound(s: f64, eps: f64) -> f64 {
    let c = s * s * (1.0 - s) / 4.0;
    let a = 1.0 - 2.0 * s;
    let integral = if a.abs() < 1e-14 {
        -eps.ln()
    } else {
        (1.0 - eps.powf(a)) / a
    };
    c * integral
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub s: f64,
    /// `(t, (-Δ)^s μ_s(t))`
    pub harmonicity_residuals: Vec<(f64, f64)>,
    /// `ϖ_{2,s}`
    pub varpi: f64,
    /// `(ε, E(ε), error estimate)`
    pub energy_table: Vec<(f64, f64, f64)>,
    /// Slope of `log(E(ε_{k+1}) - E(ε_k))` against `log ε_{k+1}`.
    pub divergence_slope: f64,
    /// `E(ε) / log(1/ε)` at the smallest `ε`.
    pub log_ratio: f64,
    /// `E(ε) / log²(1/ε)` at the smallest `ε`; tends to `1/4` when `s = 1/2`.
    pub log_squared_ratio: f64,
    pub lower_bound_check: bool,
}

/// Runs every check of the counterexample at order `s` on a strictly
/// decreasing list of cutoffs, ideally a geometric one.
pub fn counterexample_suite(s: f64, epsilons: &[f64]) -> Result<CounterexampleReport> {
    check_s(s)?;
    check_range(
        "epsilons",
        epsilons.len() as f64,
        epsilons.len() >= 3,
        "at least three cutoffs are needed",
    )?;
    for w in epsilons.windows(2) {
        check_range("epsilons", w[1], w[1] < w[0], "cutoffs must strictly decrease")?;
    }
    for &e in epsilons {
        check_range("eps", e, e > 0.0 && e < 1.0, "cutoff must lie in (0, 1)")?;
    }
    let mu = Analytic::positive_power(s, 0.0);
    let harmonicity_residuals = HARMONICITY_POINTS
        .iter()
        .map(|&t| Ok((t, pointwise_frac_laplacian(&mu, t, s)?)))
        .collect::<Result<Vec<_>>>()?;
    let varpi = varpi_constant(2, s)?;

    let energy_table = epsilons
        .iter()
        .map(|&e| {
            let est = truncated_energy_estimate(s, e)?;
            Ok((e, est.value, est.error))
        })
        .collect::<Result<Vec<_>>>()?;

    let (xs, ys): (Vec<f64>, Vec<f64>) = energy_table
        .windows(2)
        .map(|w| (w[1].0.ln(), (w[1].1 - w[0].1).max(f64::MIN_POSITIVE).ln()))
        .unzip();
    let divergence_slope = linear_fit(&xs, &ys).0;
    let &(e_last, v_last, _) = energy_table.last().unwrap();
    let log_ratio = v_last / (1.0 / e_last).ln();
    let log_squared_ratio = log_ratio / (1.0 / e_last).ln();
    let lower_bound_check = energy_table
        .iter()
        .all(|&(e, v, err)| v + err >= lower_bound(s, e));

    Ok(CounterexampleReport {
        s,
        harmonicity_residuals,
        varpi,
        energy_table,
        divergence_slope,
        log_ratio,
        log_squared_ratio,
        lower_bound_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{adaptive, Tolerance};

    /// Nested adaptive quadrature of `E(ε)` split at the diagonal.
    fn oracle(s: f64, eps: f64) -> f64 {
        let dmu = |x: f64| s * x.powf(s - 1.0);
        let tol = Tolerance::relative(1e-10);
        let outer = |t: f64| {
            let f = |r: f64| (dmu(t) - dmu(r)).powi(2) * (t - r).abs().powf(1.0 - 4.0 * s);
            adaptive(f, eps, t, tol).value + adaptive(f, t, 1.0, tol).value
        };
        adaptive(outer, eps, 1.0, tol).value
    }

    #[test]
    fn energy_matches_nested_oracle() {
        for (s, eps) in [(0.5, 0.25), (0.6, 0.125)] {
            let e = truncated_energy_estimate(s, eps).unwrap();
            let o = oracle(s, eps);
            assert!((e.value - o).abs() < 1e-6 * o, "s={s}: {} vs {o}", e.value);
        }
    }

    #[test]
    fn energy_decreases_in_eps() {
        let a = truncated_energy(0.75, 0.1, PairRule::default()).unwrap();
        let b = truncated_energy(0.75, 0.05, PairRule::default()).unwrap();
        assert!(b > a && a > 0.0);
    }

    #[test]
    fn half_order_grows_like_log_squared() {
        // for s = 1/2 the region t << r contributes ∫∫ 1/(4tr) twice, so
        // E(ε) / log²(1/ε) increases toward 1/4
        let ratio = |k: i32| {
            let e = 2f64.powi(-k);
            truncated_energy(0.5, e, PairRule::default()).unwrap() / (1.0 / e).ln().powi(2)
        };
        let (a, b, c) = (ratio(20), ratio(80), ratio(320));
        assert!(a < b && b < c && c < 0.25, "{a} {b} {c}");
        assert!(0.25 - c < 0.5 * (0.25 - b));
    }

    #[test]
    fn lower_bound_log_case() {
        let v = lower_bound(0.5, (-3.0f64).exp());
        assert!((v - 0.25 * 0.5 / 4.0 * 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(counterexample_suite(0.4, &[0.5, 0.25, 0.125]).is_err());
        assert!(counterexample_suite(0.6, &[0.5, 0.5, 0.125]).is_err());
        assert!(counterexample_suite(0.6, &[0.5, 0.25]).is_err());
    }
}
