//! Principal-value evaluation of the fractional Laplacian
//! `(-Δ)^s u(x) = 2 PV ∫ (u(x) - u(y)) |x - y|^{-n-2s} dy`.

use statrs::function::gamma::gamma;

use crate::error::{check_range, Error, Result};
use crate::function::RealFn;
use crate::quadrature::{self, Tolerance};

fn check_s(s: f64) -> Result<()> {
    check_range("s", s, s > 0.0 && s < 1.0, "order must lie in (0, 1)")
}

/// `∫_0^∞ D(r) r^{-1-2s} dr` with `D(r) = 2u(x) - u(x+r) - u(x-r)` and
/// `D(r) ≈ c r²` below `r0`.
fn symmetric_radial(u: &dyn RealFn, x: f64, s: f64) -> Result<f64> {
    let ux = u.eval(x);
    let d = |r: f64| 2.0 * ux - u.eval(x + r) - u.eval(x - r);
    let dists: Vec<f64> = u.kinks().iter().map(|k| (k - x).abs()).collect();
    if dists.iter().any(|&v| v == 0.0) {
        return Err(Error::PVDivergence(x));
    }
    let nearest = dists.iter().copied().fold(1.0, f64::min);
    let r0 = 1e-3 * nearest;
    let c = d(r0) / (r0 * r0);
    let c_half = d(0.5 * r0) / (0.25 * r0 * r0);
    let noise = 1e3 * f64::EPSILON * (ux.abs() + 1.0) / (r0 * r0);
    if (c - c_half).abs() > 1e-2 * c.abs().max(c_half.abs()) + noise {
        return Err(Error::PVDivergence(x));
    }
    let two_s = 2.0 * s;
    let near = c * r0.powf(2.0 - two_s) / (2.0 - two_s);

    let far_start = dists.iter().copied().fold(1.0, f64::max) * 2.0;
    let mut breaks = vec![r0];
    breaks.extend(dists.iter().copied().filter(|&v| v > r0 && v < far_start));
    breaks.push(far_start);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-12,
        max_intervals: 4000,
    };
    let g = |r: f64| d(r) * r.powf(-1.0 - two_s);
    let mut middle = 0.0;
    for w in breaks.windows(2) {
        middle += quadrature::adaptive(g, w[0], w[1], tol).value;
    }
    let far = quadrature::adaptive_to_infinity(g, far_start, tol).value;
    let total = near + middle + far;
    if !total.is_finite() {
        return Err(Error::PVDivergence(x));
    }
    Ok(total)
}

/// `(-Δ)^s u(x)` in one dimension. Requires `u` to be smooth near `x`.
pub fn pointwise_frac_laplacian(u: &dyn RealFn, x: f64, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(2.0 * symmetric_radial(u, x, s)?)
}

/// `(-Δ)^s` of `(x_1, x_2) ↦ μ(x_2)` at a point with `x_2 = t`, integrated in
/// polar coordinates around that point.
pub fn half_plane_frac_laplacian(mu: &dyn RealFn, t: f64, s: f64) -> Result<f64> {
    check_s(s)?;
    // the inner ρ-integral at angle θ is a rescaled 1D radial integral
    let mut failure = None;
    let inner = |theta: f64| -> f64 {
        let sn = theta.sin();
        if sn <= 0.0 {
            return 0.0;
        }
        match symmetric_radial_scaled(mu, t, s, sn) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let val = quadrature::adaptive(
        inner,
        0.0,
        std::f64::consts::PI,
        Tolerance::relative(1e-10),
    )
    .value;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * val)
}

/// `∫_0^∞ (2μ(t) - μ(t + ρ a) - μ(t - ρ a)) ρ^{-1-2s} dρ` for `a ∈ (0, 1]`.
fn symmetric_radial_scaled(mu: &dyn RealFn, t: f64, s: f64, a: f64) -> Result<f64> {
    struct Scaled<'a> {
        mu: &'a dyn RealFn,
        t: f64,
        a: f64,
    }
    impl RealFn for Scaled<'_> {
        fn eval(&self, rho: f64) -> f64 {
            self.mu.eval(self.t + self.a * rho)
        }
        fn kinks(&self) -> Vec<f64> {
            self.mu.kinks().iter().map(|k| (k - self.t) / self.a).collect()
        }
    }
    let f = Scaled { mu, t, a };
    symmetric_radial(&f, 0.0, s)
}

/// `ϖ_{n,s} = ∫_{ℝ^{n-1}} (1 + |z'|²)^{-(n+2s)/2} dz'`, equal to
/// `|S^{n-2}| ∫_0^{π/2} sin^{n-2}θ cos^{2s}θ dθ` for `n ≥ 2`.
pub fn varpi_constant(n: usize, s: f64) -> Result<f64> {
    check_s(s)?;
    check_range("n", n as f64, n >= 1, "dimension must be positive")?;
    if n == 1 {
        return Ok(1.0);
    }
    let m = (n - 1) as f64;
    let sphere = 2.0 * std::f64::consts::PI.powf(m / 2.0) / gamma(m / 2.0);
    let k = (n - 2) as i32;
    let integral = quadrature::adaptive(
        |th: f64| th.sin().powi(k) * th.cos().powf(2.0 * s),
        0.0,
        std::f64::consts::FRAC_PI_2,
        Tolerance::relative(1e-13),
    )
    .value;
    Ok(sphere * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Analytic;

    #[test]
    fn constants_are_annihilated() {
        let u = Analytic::new(|_| 4.0);
        assert_eq!(pointwise_frac_laplacian(&u, 0.3, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_is_half_harmonic() {
        let u = Analytic::positive_power(0.5, 0.0);
        for x in [0.5, 1.0, 2.0] {
            let v = pointwise_frac_laplacian(&u, x, 0.5).unwrap();
            assert!(v.abs() < 1e-6, "x={x}: {v}");
        }
    }

    #[test]
    fn gaussian_matches_closed_form() {
        // (-Δ)^s e^{-x²} at 0 in this normalization is
        // 2 ∫_0^∞ 2(1 - e^{-r²}) r^{-1-2s} dr = 2 Γ(1 - s) / s
        let u = Analytic::new(|x: f64| (-x * x).exp());
        for s in [0.25, 0.5, 0.8] {
            let v = pointwise_frac_laplacian(&u, 0.0, s).unwrap();
            let exact = 2.0 * gamma(1.0 - s) / s;
            assert!((v - exact).abs() < 1e-7 * exact, "s={s}: {v} vs {exact}");
        }
    }

    #[test]
    fn kink_at_point_diverges() {
        let u = Analytic::new(|x: f64| x.abs().sqrt());
        assert!(matches!(
            pointwise_frac_laplacian(&u, 0.0, 0.5),
            Err(Error::PVDivergence(_))
        ));
        let hidden = Analytic::new(|x: f64| x.abs().powf(0.7));
        assert!(pointwise_frac_laplacian(&hidden, 0.0, 0.5).is_err());
        // growth faster than |x|^{2s} makes the tail diverge
        let steep = Analytic::positive_power(0.75, 0.0);
        assert!(pointwise_frac_laplacian(&steep, 1.0, 0.3).is_err());
    }

    #[test]
    fn varpi_values() {
        assert_eq!(varpi_constant(1, 0.3).unwrap(), 1.0);
        assert!((varpi_constant(2, 0.5).unwrap() - 2.0).abs() < 1e-12);
        // n = 3, s = 1/2: 2π ∫ ρ (1+ρ²)^{-2} dρ = π
        assert!((varpi_constant(3, 0.5).unwrap() - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn half_plane_factorizes() {
        let mu = Analytic::positive_power(0.5, 0.0);
        let bump = Analytic::bump(0.0, 1.0, 1.0);
        for (f, t, s) in [(&bump as &dyn RealFn, 0.2, 0.4), (&mu as &dyn RealFn, 1.0, 0.4)] {
            let one = pointwise_frac_laplacian(f, t, s).unwrap();
            let two = half_plane_frac_laplacian(f, t, s).unwrap();
            let w = varpi_constant(2, s).unwrap();
            assert!((two - w * one).abs() < 1e-6 * (1.0 + two.abs()), "{two} vs {}", w * one);
        }
    }
}
