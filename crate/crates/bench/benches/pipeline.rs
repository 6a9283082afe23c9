use criterion::{black_box, criterion_group, criterion_main, Criterion};

use ztel_bench::pipeline;
use ztel_core::compactification::{contraction_ray, RayTarget};
use ztel_core::nullity::{decay_experiment, eta_estimate, Family, FamilySpec};
use ztel_core::{Automorphism, BoundaryPoint, FundamentalDomain, Group, PsiMode};

fn bench_ball(c: &mut Criterion) {
    let group = Group::new(Automorphism::heisenberg());
    c.bench_function("heisenberg ball r=8", |b| b.iter(|| group.ball(black_box(8), 10_000_000).unwrap().len()));
}

fn bench_eta(c: &mut Criterion) {
    let aut = Automorphism::sol();
    let domain = FundamentalDomain::grid(2, 0.25).unwrap();
    c.bench_function("sol eta kmax=24", |b| b.iter(|| eta_estimate(&aut, &domain, black_box(24))));
}

fn bench_decay(c: &mut Criterion) {
    let p = pipeline(Automorphism::heisenberg(), 0.25, 24, PsiMode::Standard).unwrap();
    let families = [
        FamilySpec::new(Family::TPowers, vec![4, 8, 16, 32, 64], None),
        FamilySpec::new(Family::Axis { axis: 1 }, FamilySpec::powers_of_three(9), None),
    ];
    c.bench_function("heisenberg decay", |b| {
        b.iter(|| decay_experiment(&p.spec, &p.aut, &p.domain, black_box(&families)).unwrap())
    });
}

fn bench_ray(c: &mut Criterion) {
    let p = pipeline(Automorphism::heisenberg(), 0.5, 16, PsiMode::Standard).unwrap();
    let target = RayTarget::Boundary(BoundaryPoint::new(vec![0.6, 0.8], 1.5).unwrap());
    c.bench_function("contraction ray t=1000", |b| {
        b.iter(|| contraction_ray(&p.spec, &target, black_box(1000.0)).unwrap())
    });
}

criterion_group!(benches, bench_ball, bench_eta, bench_decay, bench_ray);
criterion_main!(benches);
