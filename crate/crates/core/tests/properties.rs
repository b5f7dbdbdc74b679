use nonlocal_core::increments::{ball_defect, ball_defect_bound, difference, difference_recursive, Ball};
use nonlocal_core::kernels::frac_laplacian_kernel;
use nonlocal_core::seminorms::{gagliardo, Ladder, ModulusProfile};
use nonlocal_core::solver::assemble;
use nonlocal_core::{Analytic, Domain1D, RealFn, Rhs, WeakProblem};
use proptest::prelude::*;

fn trig(a: f64, b: f64, c: f64) -> Analytic {
    Analytic::new(move |x: f64| a * (b * x).sin() + c * x * x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binomial_and_recursive_differences_agree(
        a in -2.0..2.0f64, b in 0.1..5.0f64, c in -1.0..1.0f64,
        z in -0.5..0.5f64, k in 1usize..6, x in -1.0..1.0f64,
    ) {
        let u = trig(a, b, c);
        let direct = difference(&u, z, k).eval(x);
        let rec = difference_recursive(&u, z, k, x);
        prop_assert!((direct - rec).abs() <= 1e-12 * (1.0 + direct.abs()) * (1usize << k) as f64);
    }

    #[test]
    fn second_difference_kills_affine(a in -10.0..10.0f64, b in -10.0..10.0f64, z in -1.0..1.0f64, x in -5.0..5.0f64) {
        let u = Analytic::new(move |t: f64| a * t + b);
        let d = difference(&u, z, 2).eval(x);
        prop_assert!(d.abs() <= 64.0 * f64::EPSILON * (a.abs() * (x.abs() + 2.0 * z.abs()) + b.abs()));
    }

    #[test]
    fn ball_defect_below_bound(n in 1usize..4, r in 0.01..10.0f64, zs in prop::collection::vec(-20.0..20.0f64, 3)) {
        let ball = Ball::new(vec![0.0; n], r).unwrap();
        let z = &zs[..n];
        let v = ball_defect(&ball, z).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!(v <= ball_defect_bound(&ball, z) * (1.0 + 1e-12));
    }

    #[test]
    fn gagliardo_is_homogeneous(c in -3.0..3.0f64, sigma in 0.1..0.9f64) {
        let dom = Domain1D::new(-1.0, 1.0).unwrap();
        let u = Analytic::bump(0.0, 0.7, 1.0);
        let base = gagliardo(&u, dom, sigma, 2.0).unwrap();
        let scaled = gagliardo(&u.scaled(c), dom, sigma, 2.0).unwrap().value;
        // rounding in u(x) - u(x + t) near the diagonal differs after scaling
        let slack = 1e-12 * base.value + 2.0 * c.abs() * base.quadrature_error;
        prop_assert!((scaled - c.abs() * base.value).abs() <= slack);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn modulus_profile_is_monotone(a in 0.5..2.0f64, alpha in 0.3..2.5f64) {
        let u = Analytic::positive_power(alpha, a - 1.0);
        let dom = Domain1D::new(-1.0, 1.0).unwrap();
        let prof = ModulusProfile::new(&u, dom, 2.0, 2, &Ladder::default());
        prop_assert!(prof.etas.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(prof.omegas.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn stiffness_is_symmetric_positive(s in 0.1..0.9f64, cells in 4usize..24) {
        let p = WeakProblem::new(frac_laplacian_kernel(s).unwrap(), Domain1D::new(0.0, 1.0).unwrap(), Rhs::constant(1.0), cells).unwrap();
        let a = assemble(&p).unwrap().matrix;
        prop_assert_eq!(&a, &a.transpose());
        prop_assert!(a.clone().cholesky().is_some());
    }
}
