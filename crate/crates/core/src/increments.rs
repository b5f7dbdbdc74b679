//! Finite differences, shrunken domains, translated-ball defects and the
//! discrete integration by parts identity.

use std::f64::consts::PI;

use crate::error::{check_range, Error, Result};
use crate::function::{Domain1D, RealFn, UniformMesh};
use crate::kernels::KernelSpec;
use crate::quadrature::{clip_breaks, subdivide, PairIntegrator, PairRule};

/// `U_{kz} = {x ∈ U : x + iz ∈ U for i = 1..k}`.
pub fn shrink_domain(u: Domain1D, z: f64, k: usize) -> Domain1D {
    if u.is_empty() {
        return Domain1D::EMPTY;
    }
    let reach = k as f64 * z.abs();
    if z >= 0.0 {
        Domain1D::clamped(u.lo, u.hi - reach)
    } else {
        Domain1D::clamped(u.lo + reach, u.hi)
    }
}

pub fn binomial(k: usize, i: usize) -> f64 {
    if i > k {
        return 0.0;
    }
    (0..i).fold(1.0, |acc, j| acc * (k - j) as f64 / (j + 1) as f64)
}

/// `Δ_z^k u = Σ_{i=0}^k (-1)^{k-i} C(k,i) u(· + iz)`, evaluated lazily.
#[derive(Debug, Clone)]
pub struct Difference<F> {
    u: F,
    z: f64,
    k: usize,
    coeffs: Vec<f64>,
}

pub fn difference<F: RealFn>(u: F, z: f64, k: usize) -> Difference<F> {
    let coeffs = (0..=k)
        .map(|i| {
            let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(k, i)
        })
        .collect();
    Difference { u, z, k, coeffs }
}

impl<F> Difference<F> {
    pub fn shift(&self) -> f64 {
        self.z
    }

    pub fn order(&self) -> usize {
        self.k
    }
}

impl<F: RealFn> Difference<F> {
    /// Nodal samples of `Δ_z^k u` on `mesh`.
    pub fn sample(&self, mesh: &UniformMesh) -> Vec<f64> {
        mesh.nodes().map(|x| self.eval(x)).collect()
    }
}

impl<F: RealFn> RealFn for Difference<F> {
    fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.u.eval(x + i as f64 * self.z))
            .sum()
    }

    fn kinks(&self) -> Vec<f64> {
        let base = self.u.kinks();
        let mut out = Vec::with_capacity(base.len() * (self.k + 1));
        for i in 0..=self.k {
            let shift = i as f64 * self.z;
            out.extend(base.iter().map(|c| c - shift));
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// `Δ_z(Δ_z^{k-1} u)(x)` by direct recursion.
pub fn difference_recursive(u: &dyn RealFn, z: f64, k: usize, x: f64) -> f64 {
    if k == 0 {
        u.eval(x)
    } else {
        difference_recursive(u, z, k - 1, x + z) - difference_recursive(u, z, k - 1, x)
    }
}

/// A Euclidean ball in dimension `center.len() ≤ 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_range("radius", radius, radius > 0.0, "ball radius must be positive")?;
        let n = center.len() as f64;
        check_range("dimension", n, (1.0..=3.0).contains(&n), "dimension must be 1, 2 or 3")?;
        Ok(Ball { center, radius })
    }

    pub fn interval(center: f64, radius: f64) -> Result<Self> {
        Ball::new(vec![center], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// The concentric interval of radius `rho · R` (one dimension only).
    pub fn scaled_interval(&self, rho: f64) -> Domain1D {
        let c = self.center[0];
        let r = rho * self.radius;
        Domain1D::clamped(c - r, c + r)
    }
}

/// `H^{n-1}(∂B_1)` for `n = 1, 2, 3`.
pub fn unit_sphere_measure(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}

/// `|B Δ (B + z)|`.
pub fn ball_defect(b: &Ball, z: &[f64]) -> Result<f64> {
    if z.len() != b.dim() {
        return Err(Error::ParameterOutOfRange {
            name: "z",
            value: z.len() as f64,
            reason: "shift dimension differs from ball dimension",
        });
    }
    let d = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = b.radius;
    if d == 0.0 {
        return Ok(0.0);
    }
    let far = d >= 2.0 * r;
    let value = match b.dim() {
        1 => 2.0 * d.min(2.0 * r),
        2 => {
            let disk = PI * r * r;
            let lens = if far {
                0.0
            } else {
                2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt()
            };
            2.0 * (disk - lens)
        }
        _ => {
            let ball = 4.0 / 3.0 * PI * r.powi(3);
            let lens = if far {
                0.0
            } else {
                PI * (4.0 * r + d) * (2.0 * r - d).powi(2) / 12.0
            };
            2.0 * (ball - lens)
        }
    };
    Ok(value.max(0.0))
}

/// `2 H^{n-1}(∂B_1) R^{n-1} |z|`.
pub fn ball_defect_bound(b: &Ball, z: &[f64]) -> f64 {
    let n = b.dim();
    let d = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    2.0 * unit_sphere_measure(n) * b.radius.powi(n as i32 - 1) * d
}

/// Both sides of the discrete integration by parts identity on the
/// concentric intervals `B_{2R} ⊂ B_{6R} ⊂ B_{8R}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartsReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// Second-difference pairing, kernel-increment sum, boundary overlap sum.
    pub terms: [f64; 3],
    pub error_estimate: f64,
}

pub fn discrete_parts_check(
    u: &dyn RealFn,
    v: &dyn RealFn,
    k: &KernelSpec,
    ball: &Ball,
    z: f64,
) -> Result<PartsReport> {
    let coarse = parts_sides(u, v, k, ball, z, PairRule::default())?;
    let fine = parts_sides(u, v, k, ball, z, PairRule::default().refined())?;
    let size: f64 = fine.terms.iter().map(|t| t.abs()).sum::<f64>() + fine.lhs.abs();
    let error_estimate = (fine.lhs - coarse.lhs).abs()
        + (fine.rhs - coarse.rhs).abs()
        + 64.0 * f64::EPSILON * size;
    Ok(PartsReport {
        error_estimate,
        ..fine
    })
}

/// Evaluates the identity with one fixed quadrature rule.
pub fn parts_sides(
    u: &dyn RealFn,
    v: &dyn RealFn,
    k: &KernelSpec,
    ball: &Ball,
    z: f64,
    rule: PairRule,
) -> Result<PartsReport> {
    if ball.dim() != 1 {
        return Err(Error::ParameterOutOfRange {
            name: "dimension",
            value: ball.dim() as f64,
            reason: "the identity is evaluated on intervals",
        });
    }
    let r = ball.radius;
    if z.abs() >= r {
        return Err(Error::ShiftTooLarge { z, radius: r });
    }
    let b2 = ball.scaled_interval(2.0);
    let b6 = ball.scaled_interval(6.0);
    let b8 = ball.scaled_interval(8.0);
    check_support(v, b2, b8)?;

    let w = [1.0, -2.0, 1.0];
    let uk = u.kinks();
    let vk = v.kinks();
    let shifted = |base: &[f64], sign: f64| -> Vec<f64> {
        (0..3)
            .flat_map(|i| base.iter().map(move |p| p + sign * i as f64 * z))
            .collect()
    };
    let integ = PairIntegrator::new(rule, 1.0 - 2.0 * k.s);

    // left side on B_8R: w(x) = Δ_{-z}^2 v(x) = Σ (-1)^i C(2,i) v(x - iz)
    let wv = |x: f64| (0..3).map(|i| w[i] * v.eval(x - i as f64 * z)).sum::<f64>();
    let mut lb = uk.clone();
    lb.extend(shifted(&vk, 1.0));
    let lb = subdivide(&clip_breaks(b8.lo, b8.hi, lb), 0.25 * r);
    let [lhs] = integ.over_square(&lb, &|x, t| {
        let y = x + t;
        [(u.eval(x) - u.eval(y)) * (wv(x) - wv(y)) * k.eval_xt(x, t)]
    });

    // first two groups on B_6R
    let mut rb = shifted(&uk, -1.0);
    rb.extend(vk.iter().copied());
    let rb = subdivide(&clip_breaks(b6.lo, b6.hi, rb), 0.25 * r);
    let d2u = |x: f64| (0..3).map(|i| w[i] * u.eval(x + i as f64 * z)).sum::<f64>();
    let [t1, t2] = integ.over_square(&rb, &|x, t| {
        let y = x + t;
        let kv = k.eval_xt(x, t);
        let dv = v.eval(x) - v.eval(y);
        let first = (d2u(x) - d2u(y)) * dv * kv;
        let mut second = 0.0;
        for i in 1..3 {
            let s = i as f64 * z;
            let dk = k.eval_xt(x + s, t) - kv;
            if dk != 0.0 {
                second += w[i] * (u.eval(x + s) - u.eval(y + s)) * dv * dk;
            }
        }
        [first, second]
    });

    // boundary overlap: x ∈ B_8R \ (B_6R + iz), y - iz ∈ B_2R
    let mut t3 = 0.0;
    for i in 0..3 {
        let s = i as f64 * z;
        let left = clip_breaks(b8.lo, (b6.lo + s).max(b8.lo), uk.iter().copied());
        let left = subdivide(&left, 0.25 * r);
        let right = clip_breaks((b6.hi + s).min(b8.hi), b8.hi, uk.iter().copied());
        let right = subdivide(&right, 0.25 * r);
        let mut yk = uk.clone();
        yk.extend(vk.iter().map(|p| p + s));
        let ys = clip_breaks((b2.lo + s).max(b8.lo), (b2.hi + s).min(b8.hi), yk);
        let ys = subdivide(&ys, 0.25 * r);
        let g = |x: f64, t: f64| {
            let y = x + t;
            [(u.eval(x) - u.eval(y)) * v.eval(y - s) * k.eval_xt(x, t)]
        };
        let [a] = integ.tensor_panels(&left, &ys, &g);
        let [b] = integ.tensor_panels(&right, &ys, &g);
        t3 += -2.0 * w[i] * (a + b);
    }
    let rhs = t1 + t2 + t3;
    Ok(PartsReport {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        terms: [t1, t2, t3],
        error_estimate: 0.0,
    })
}

fn check_support(v: &dyn RealFn, b2: Domain1D, b8: Domain1D) -> Result<()> {
    let slack = 1e-12 * b8.len();
    let outside = |x: f64| x < b2.lo - slack || x > b2.hi + slack;
    let probes = v
        .kinks()
        .into_iter()
        .chain((0..=512).map(|j| b8.lo + b8.len() * j as f64 / 512.0));
    for x in probes {
        if outside(x) && v.eval(x) != 0.0 {
            return Err(Error::SupportViolation(x));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{Analytic, GridFunction};
    use crate::kernels::{frac_laplacian_kernel, holder_coefficient_kernel};

    fn unit() -> Domain1D {
        Domain1D::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn shrink_examples() {
        assert_eq!(shrink_domain(unit(), 0.25, 2), Domain1D::new(0.0, 0.5).unwrap());
        assert_eq!(shrink_domain(unit(), 0.0, 7), unit());
        assert!(shrink_domain(unit(), 0.6, 2).is_empty());
        assert_eq!(shrink_domain(unit(), -0.25, 1), Domain1D::new(0.25, 1.0).unwrap());
        assert!(shrink_domain(Domain1D::EMPTY, 0.1, 1).is_empty());
    }

    #[test]
    fn second_difference_of_square() {
        let mesh = UniformMesh::new(unit(), 64).unwrap();
        let h = mesh.h();
        let u = GridFunction::from_closed_form(mesh, |x| x * x).unwrap();
        // exterior is exact, interior is interpolated; use a nodal x and z = h
        let d = difference(&u, h, 2);
        for j in 0..60 {
            let x = j as f64 * h;
            assert!((d.eval(x) - 2.0 * h * h).abs() < 1e-14, "{}", d.eval(x));
        }
    }

    #[test]
    fn affine_is_annihilated() {
        let mesh = UniformMesh::new(unit(), 10).unwrap();
        let u = GridFunction::sample_zero_outside(mesh, |x| 3.0 * x - 1.0).unwrap();
        let z = 0.137;
        let d = difference(&u, z, 2);
        let dom = shrink_domain(unit(), z, 2);
        for j in 0..=50 {
            let x = dom.lo + dom.len() * j as f64 / 50.0;
            assert!(d.eval(x).abs() < 1e-14);
        }
    }

    #[test]
    fn recursive_matches_binomial() {
        let u = Analytic::new(|x: f64| (3.0 * x).sin() + x.powi(5));
        for k in 0..6 {
            let d = difference(&u, 0.07, k);
            for x in [-0.4, 0.0, 0.3, 1.1] {
                let a = d.eval(x);
                let b = difference_recursive(&u, 0.07, k, x);
                assert!((a - b).abs() <= 1e-13 * (1.0 + a.abs()), "k={k}");
            }
        }
    }

    #[test]
    fn binomial_coefficients() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
    }

    #[test]
    fn defect_examples() {
        let b1 = Ball::interval(0.0, 1.0).unwrap();
        assert!((ball_defect(&b1, &[0.1]).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(ball_defect(&b1, &[0.0]).unwrap(), 0.0);
        assert_eq!(ball_defect(&b1, &[5.0]).unwrap(), 4.0);
        let b2 = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball_defect(&b2, &[0.0, 0.0]).unwrap(), 0.0);
        assert!((ball_defect(&b2, &[3.0, 0.0]).unwrap() - 2.0 * PI).abs() < 1e-14);
        let b3 = Ball::new(vec![1.0, 2.0, 3.0], 2.0).unwrap();
        let full = 2.0 * 4.0 / 3.0 * PI * 8.0;
        assert!((ball_defect(&b3, &[0.0, 0.0, 4.0]).unwrap() - full).abs() < 1e-12);
        assert!(ball_defect(&b3, &[1.0]).is_err());
    }

    #[test]
    fn defect_is_below_bound() {
        for n in 1..=3 {
            let b = Ball::new(vec![0.0; n], 0.7).unwrap();
            for j in 1..200 {
                let mut z = vec![0.0; n];
                z[0] = 0.01 * j as f64;
                assert!(ball_defect(&b, &z).unwrap() <= ball_defect_bound(&b, &z));
            }
        }
    }

    #[test]
    fn parts_identity_vanishes_at_zero_shift() {
        let u = Analytic::new(|x: f64| (x * 0.7).cos());
        let v = Analytic::bump(0.0, 1.5, 1.0);
        let k = frac_laplacian_kernel(0.4).unwrap();
        let ball = Ball::interval(0.0, 1.0).unwrap();
        let rep = discrete_parts_check(&u, &v, &k, &ball, 0.0).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.rhs, 0.0);
        assert_eq!(rep.gap, 0.0);
    }

    #[test]
    fn translation_invariant_kernel_has_no_increment_term() {
        let u = Analytic::bump(0.2, 1.8, 1.0);
        let v = Analytic::bump(0.0, 1.9, 1.0);
        let k = frac_laplacian_kernel(0.3).unwrap();
        let ball = Ball::interval(0.0, 1.0).unwrap();
        let rep = parts_sides(&u, &v, &k, &ball, 0.3, PairRule::default()).unwrap();
        assert_eq!(rep.terms[1], 0.0);
    }

    #[test]
    fn parts_identity_holds_for_holder_kernel() {
        let u = Analytic::new(|x: f64| (0.9 * x).sin() + 0.1 * x * x);
        let v = Analytic::bump(0.1, 1.7, 1.0);
        let k = holder_coefficient_kernel(0.35, |x, y| 2.0 + (x + y).sin(), 1.0, 3.0, 2.0).unwrap();
        let ball = Ball::interval(0.0, 1.0).unwrap();
        let rep = discrete_parts_check(&u, &v, &k, &ball, -0.4).unwrap();
        assert!(rep.gap <= 10.0 * rep.error_estimate, "{rep:?}");
        assert!(rep.gap < 1e-6 * rep.lhs.abs().max(1.0), "{rep:?}");
    }

    #[test]
    fn parts_errors() {
        let u = Analytic::new(|x: f64| x);
        let k = frac_laplacian_kernel(0.3).unwrap();
        let ball = Ball::interval(0.0, 1.0).unwrap();
        let wide = Analytic::bump(0.0, 3.0, 1.0);
        assert!(matches!(
            discrete_parts_check(&u, &wide, &k, &ball, 0.1),
            Err(Error::SupportViolation(_))
        ));
        let v = Analytic::bump(0.0, 1.0, 1.0);
        assert_eq!(
            discrete_parts_check(&u, &v, &k, &ball, 1.0),
            Err(Error::ShiftTooLarge { z: 1.0, radius: 1.0 })
        );
    }
}
