use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use intcon_bench::{csp, PARABOLA_CIRCLE_UNIT, PARABOLA_CIRCLE_WIDE, THREE_QUADRICS};
use intcon_core::{
    contract_mul, contract_sq, contract_sum, propagate_roundrobin, propagate_worklist, solve,
    Interval,
};

fn contractors(c: &mut Criterion) {
    let a = Interval::new(-1.5, 2.0);
    let b = Interval::new(0.25, 3.0);
    let z = Interval::new(-4.0, 1.0);
    c.bench_function("contract_sum", |bench| {
        bench.iter(|| contract_sum(black_box(a), black_box(b), black_box(z)))
    });
    c.bench_function("contract_mul", |bench| {
        bench.iter(|| contract_mul(black_box(a), black_box(b), black_box(z)))
    });
    c.bench_function("contract_sq", |bench| {
        bench.iter(|| contract_sq(black_box(a), black_box(b)))
    });
}

fn propagation(c: &mut Criterion) {
    let p = csp(PARABOLA_CIRCLE_UNIT);
    let mut right = p.initial_box().clone();
    right.set("x", Interval::new(0.5, 1.0));
    c.bench_function("worklist_converge", |bench| {
        bench.iter(|| propagate_worklist(&p, black_box(&right)).unwrap())
    });
    c.bench_function("roundrobin_converge", |bench| {
        bench.iter(|| propagate_roundrobin(&p, black_box(&right), 1_000_000).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let wide = csp(PARABOLA_CIRCLE_WIDE);
    c.bench_function("solve_two_roots", |bench| {
        bench.iter(|| solve(black_box(&wide), 1e-10, 4096).unwrap())
    });
    let cube = csp(THREE_QUADRICS);
    c.bench_function("solve_three_quadrics", |bench| {
        bench.iter(|| solve(black_box(&cube), 1e-8, 4096).unwrap())
    });
}

criterion_group!(benches, contractors, propagation, search);
criterion_main!(benches);
