use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nonlocal_core::kernels::frac_laplacian_kernel;
use nonlocal_core::seminorms::{gagliardo, nikolskii, Ladder};
use nonlocal_core::solver::assemble;
use nonlocal_core::{Analytic, Domain1D, Rhs, WeakProblem};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    g.sample_size(10);
    let k = frac_laplacian_kernel(0.4).unwrap();
    let dom = Domain1D::new(-1.0, 1.0).unwrap();
    for cells in [32, 128, 512] {
        let p = WeakProblem::new(k.clone(), dom, Rhs::constant(1.0), cells).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(cells), &p, |b, p| {
            b.iter(|| assemble(black_box(p)).unwrap())
        });
    }
    g.finish();
}

fn seminorms(c: &mut Criterion) {
    let mut g = c.benchmark_group("seminorms");
    g.sample_size(10);
    let dom = Domain1D::new(-1.0, 1.0).unwrap();
    let u = Analytic::positive_power(0.75, 0.0);
    for sigma in [0.25, 0.5] {
        g.bench_with_input(BenchmarkId::new("gagliardo", sigma), &sigma, |b, &s| {
            b.iter(|| gagliardo(black_box(&u), dom, s, 2.0).unwrap())
        });
    }
    g.bench_function("nikolskii", |b| {
        b.iter(|| nikolskii(black_box(&u), dom, 0.5, 2.0, 1, &Ladder::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, assembly, seminorms);
criterion_main!(benches);
