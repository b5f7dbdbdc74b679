mod common;

use nonlocal_core::increments::{ball_defect, Ball};
use nonlocal_core::kernels::{frac_laplacian_kernel, holder_coefficient_kernel};
use nonlocal_core::quadrature::PairRule;
use nonlocal_core::seminorms::gagliardo;
use nonlocal_core::solver::{assemble, energy_on};
use nonlocal_core::{Analytic, Domain1D, GridFunction, RealFn, Rhs, UniformMesh, WeakProblem};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::function::gamma::gamma;

#[test]
fn gagliardo_panels_match_cell_double_sum() {
    let mesh = UniformMesh::new(common::unit_interval(), 12).unwrap();
    let u = GridFunction::sample_zero_outside(mesh, |x| (3.0 * x).sin() + x * x).unwrap();
    for (sigma, p) in [(0.5, 2.0), (0.3, 2.0), (0.25, 1.5)] {
        let fast = gagliardo(&u, common::unit_interval(), sigma, p).unwrap().value.powf(p);
        let slow = common::brute_gagliardo_pow(&u, sigma, p);
        assert!((fast - slow).abs() < 1e-6 * slow, "σ={sigma}, p={p}: {fast} vs {slow}");
    }
}

#[test]
fn stiffness_entries_match_definition() {
    let dom = Domain1D::new(-1.0, 1.0).unwrap();
    let kernels = [
        frac_laplacian_kernel(0.4).unwrap(),
        holder_coefficient_kernel(0.6, |x, y| 2.0 + (x + y).sin(), 1.0, 3.0, 2.0).unwrap(),
    ];
    for k in kernels {
        let p = WeakProblem::new(k.clone(), dom, Rhs::constant(1.0), 15).unwrap();
        let sys = assemble(&p).unwrap();
        let mesh = p.mesh();
        for (i, j) in [(1, 1), (1, 2), (3, 9), (7, 7), (14, 13), (2, 14)] {
            let brute = common::brute_stiffness_entry(&k, &mesh, i, j);
            let fast = sys.matrix[(i - 1, j - 1)];
            assert!(
                (fast - brute).abs() < 1e-4 * brute.abs().max(1e-3 * sys.matrix[(0, 0)]),
                "{}: ({i},{j}) {fast} vs {brute}",
                k.name
            );
        }
    }
}

/// Riemann sum on the FFT grid of `(2π)^{-1} ∫ |û(ξ)|² C_s |ξ|^{2s} dξ` with `C_s = 4 ∫_0^∞ (1 - cos h) h^{-1-2s} dh`.
fn fourier_energy(u: &dyn RealFn, s: f64) -> f64 {
    let n = 1 << 19;
    let half = 128.0;
    let h = 2.0 * half / n as f64;
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|j| Complex::new(u.eval(-half + j as f64 * h), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let c_s = 4.0 * gamma(1.0 - 2.0 * s) * (std::f64::consts::PI * s).cos() / (2.0 * s);
    let dxi = 2.0 * std::f64::consts::PI / (n as f64 * h);
    let mut total = 0.0;
    for (k, v) in buf.iter().enumerate() {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let xi = kk * dxi;
        total += (v.norm() * h).powi(2) * c_s * xi.abs().powf(2.0 * s);
    }
    total * dxi / (2.0 * std::f64::consts::PI)
}

#[test]
fn energy_matches_fourier_side() {
    // zero mean, so |û|² |ξ|^{2s} has no cusp at ξ = 0 to spoil the Riemann sum
    let bump = Analytic::bump(0.1, 0.8, 1.0);
    let u = Analytic::new(move |x: f64| (x - 0.1) * bump.eval(x)).with_kinks([-0.7, 0.9]);
    let support = Domain1D::new(0.1 - 0.8, 0.1 + 0.8).unwrap();
    for s in [0.3, 0.45, 0.7] {
        let k = frac_laplacian_kernel(s).unwrap();
        let direct = energy_on(&u, &u, support, &k, true, PairRule::default()).unwrap();
        let spectral = fourier_energy(&u, s);
        assert!((direct - spectral).abs() < 1e-6 * spectral, "s={s}: {direct} vs {spectral}");
    }
}

#[test]
fn planar_ball_defect_matches_monte_carlo() {
    for (r, z) in [(1.0, [0.3, 0.4]), (0.5, [0.9, -0.2]), (2.0, [5.0, 0.0])] {
        let exact = ball_defect(&Ball::new(vec![0.0, 0.0], r).unwrap(), &z).unwrap();
        let (mc, se) = common::monte_carlo_defect_2d(r, z, 2_000_000, 17);
        assert!((mc - exact).abs() <= 3.0 * se + 1e-12, "R={r}: {mc} ± {se} vs {exact}");
    }
}
