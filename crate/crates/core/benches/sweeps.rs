use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use caclab::gen::{gen_instance, random_stable, rng};
use caclab::par;
use caclab::problems::{max_feasible, solve_poset};
use caclab::reductions::{build_leq_q, compose_cac_via_omega, stable_thinning};
use caclab::{ProblemInstance, ProblemKind, SizePolicy, TypeTag};

fn corpus(n: usize, size: u32) -> Vec<ProblemInstance> {
    let mut r = rng(7);
    (0..n).map(|_| gen_instance(&mut r, ProblemKind::Cac, size, Default::default()).unwrap()).collect()
}

fn compose_one(inst: &ProblemInstance) -> bool {
    let p = &inst.poset;
    let pol = SizePolicy::new(max_feasible(p).clamp(1, 3)).unwrap();
    compose_cac_via_omega(p, |q, pol| solve_poset(q, pol).unwrap(), &pol).is_ok()
}

fn thin_one(inst: &ProblemInstance) -> usize {
    let q = build_leq_q(&inst.poset, TypeTag::Small);
    let pol = SizePolicy::new(max_feasible(&q).clamp(1, 3)).unwrap();
    let x = solve_poset(&q, &pol).unwrap().unwrap();
    stable_thinning(&inst.poset, TypeTag::Small, &x, &pol).unwrap().0.len()
}

fn compose_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("compose");
    for size in [8u32, 12] {
        let insts = corpus(64, size);
        g.bench_with_input(BenchmarkId::new("parallel", size), &insts, |b, i| b.iter(|| par::map(black_box(i), compose_one)));
        g.bench_with_input(BenchmarkId::new("sequential", size), &insts, |b, i| b.iter(|| par::map_seq(black_box(i), compose_one)));
    }
    g.finish();
}

fn thinning_sweep(c: &mut Criterion) {
    let mut r = rng(11);
    let insts: Vec<ProblemInstance> = (0..64).map(|k| random_stable(&mut r, 4 + k % 9, TypeTag::Small, false)).collect();
    let mut g = c.benchmark_group("thinning");
    g.bench_function("parallel", |b| b.iter(|| par::map(black_box(&insts), thin_one)));
    g.bench_function("sequential", |b| b.iter(|| par::map_seq(black_box(&insts), thin_one)));
    g.finish();
}

criterion_group!(benches, compose_sweep, thinning_sweep);
criterion_main!(benches);
