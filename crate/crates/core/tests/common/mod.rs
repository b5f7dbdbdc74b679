//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nonlocal_core::kernels::KernelSpec;
use nonlocal_core::quadrature::{adaptive, Tolerance};
use nonlocal_core::{Analytic, Domain1D, GridFunction, RealFn, UniformMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tight() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-11,
        max_intervals: 2000,
    }
}

/// Nested adaptive integral over `[a, b] × [c, d]`, inner variable split at `x`.
fn nested<F: Fn(f64, f64) -> f64>(f: &F, (a, b): (f64, f64), (c, d): (f64, f64)) -> f64 {
    let outer = |x: f64| {
        let g = |y: f64| f(x, y);
        if x > c && x < d {
            adaptive(g, c, x, tight()).value + adaptive(g, x, d, tight()).value
        } else {
            adaptive(g, c, d, tight()).value
        }
    };
    adaptive(outer, a, b, tight()).value
}

/// `[u]^p_{W^{σ,p}(D)}` as a double sum over all cell pairs of a nodal mesh.
pub fn brute_gagliardo_pow(u: &GridFunction, sigma: f64, p: f64) -> f64 {
    let nodes: Vec<f64> = u.mesh().nodes().collect();
    let f = |x: f64, y: f64| {
        let d = (u.eval(x) - u.eval(y)).abs();
        if d == 0.0 {
            0.0
        } else {
            d.powf(p) * (x - y).abs().powf(-1.0 - sigma * p)
        }
    };
    let mut total = 0.0;
    for i in 0..nodes.len() - 1 {
        for j in 0..nodes.len() - 1 {
            total += nested(&f, (nodes[i], nodes[i + 1]), (nodes[j], nodes[j + 1]));
        }
    }
    total
}

/// `E_K(φ_i, φ_j)` for hats on `mesh`, built from the definition: the double
/// integral over `D × D` plus the exterior term with `κ` from the kernel.
pub fn brute_stiffness_entry(k: &KernelSpec, mesh: &UniformMesh, i: usize, j: usize) -> f64 {
    let hat = |n: usize| {
        let c = mesh.node(n);
        let h = mesh.h();
        move |x: f64| (1.0 - (x - c).abs() / h).max(0.0)
    };
    let (pi, pj) = (hat(i), hat(j));
    let f = |x: f64, y: f64| {
        if x == y {
            0.0
        } else {
            (pi(x) - pi(y)) * (pj(x) - pj(y)) * k.eval(x, y)
        }
    };
    let nodes: Vec<f64> = mesh.nodes().collect();
    let in_support = |cell: usize, n: usize| cell + 1 == n || cell == n;
    let touches = |a: usize, b: usize, n: usize| in_support(a, n) || in_support(b, n);
    let mut inner = 0.0;
    for a in 0..mesh.cells {
        for b in 0..mesh.cells {
            // the integrand vanishes unless each hat is seen by x or y
            if !(touches(a, b, i) && touches(a, b, j)) {
                continue;
            }
            inner += nested(&f, (nodes[a], nodes[a + 1]), (nodes[b], nodes[b + 1]));
        }
    }
    let dom = mesh.domain();
    let ext = |x: f64| pi(x) * pj(x) * k.exterior_mass(x, dom.lo, dom.hi);
    let mut outer = 0.0;
    for a in 0..mesh.cells {
        outer += adaptive(ext, nodes[a], nodes[a + 1], tight()).value;
    }
    inner + 2.0 * outer
}

/// Monte-Carlo estimate of `|B_R Δ (B_R + z)|` in the plane, with its
/// standard error.
pub fn monte_carlo_defect_2d(r: f64, z: [f64; 2], samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = [(-r).min(z[0] - r), (-r).min(z[1] - r)];
    let hi = [r.max(z[0] + r), r.max(z[1] + r)];
    let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let mut hits = 0usize;
    for _ in 0..samples {
        let x = rng.gen_range(lo[0]..hi[0]);
        let y = rng.gen_range(lo[1]..hi[1]);
        let in_a = x * x + y * y < r * r;
        let in_b = (x - z[0]).powi(2) + (y - z[1]).powi(2) < r * r;
        if in_a != in_b {
            hits += 1;
        }
    }
    let q = hits as f64 / samples as f64;
    (area * q, area * (q * (1.0 - q) / samples as f64).sqrt())
}

/// Fifty test functions on `(-1, 1)`: bumps, kinks and `(x - a)_+^α`.
pub fn corpus() -> Vec<Analytic> {
    let mut out = Vec::new();
    for k in 0..20 {
        let c = -0.5 + 0.05 * k as f64;
        let r = 0.3 + 0.02 * k as f64;
        out.push(Analytic::bump(c, r, 1.0 + 0.1 * k as f64));
    }
    for k in 0..15 {
        let a = -0.7 + 0.1 * k as f64;
        let slope = 0.5 + 0.2 * k as f64;
        out.push(Analytic::new(move |x: f64| slope * (x - a).abs()).with_kinks([a]));
    }
    for k in 0..15 {
        let alpha = 0.55 + 0.1 * k as f64;
        let a = -0.3 + 0.04 * k as f64;
        out.push(Analytic::positive_power(alpha, a));
    }
    out
}

pub fn unit_interval() -> Domain1D {
    Domain1D::new(0.0, 1.0).unwrap()
}
