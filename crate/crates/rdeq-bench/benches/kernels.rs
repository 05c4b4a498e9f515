use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use rdeq_bench::{binary_source, layered_aux};
use rdeq_core::codesim::{decode, encode, gen_code, SimConfig};
use rdeq_core::gaussian::{boundary_sweep, GaussianParams};
use rdeq_core::prob::chain_join;
use rdeq_core::regions::{corner_points, eval_inner, RateSplit};
use rdeq_core::search::{scalarized_optimize, AuxCards, SearchBudget, Weights};

fn bench_evaluators(c: &mut Criterion) {
    let source = binary_source();
    let aux = layered_aux();
    c.bench_function("chain_join binary 2x2 layers", |b| {
        b.iter(|| chain_join(black_box(&source), black_box(&aux)).unwrap())
    });
    c.bench_function("eval_inner binary", |b| {
        b.iter(|| eval_inner(black_box(&source), black_box(&aux)).unwrap())
    });
    c.bench_function("corner_points binary", |b| {
        b.iter(|| corner_points(black_box(&source), black_box(&aux)).unwrap())
    });
}

fn bench_gaussian(c: &mut Criterion) {
    let params = GaussianParams::no_side_info(1.0, 1.0, 1.0).unwrap();
    c.bench_function("boundary_sweep 50x50", |b| {
        b.iter(|| boundary_sweep(black_box(&params), 0.5, 50).unwrap())
    });
}

fn bench_search_step(c: &mut Criterion) {
    let source = binary_source();
    let cards = AuxCards {
        v1: 2,
        u1: 2,
        v2: 2,
        u2: 2,
    };
    let weights = Weights {
        d1: 1.0,
        r2: 0.5,
        ..Weights::ZERO
    };
    let budget = SearchBudget::new(1, 25, 0.5, 7).unwrap();
    c.bench_function("scalarized hill-climb, 25 evaluations", |b| {
        b.iter(|| scalarized_optimize(black_box(&source), &weights, cards, &budget).unwrap())
    });
}

fn bench_codesim(c: &mut Criterion) {
    let source = binary_source();
    let aux = layered_aux();
    let rates = RateSplit {
        rv1: 0.3,
        ru1: 0.7,
        rv2: 0.3,
        ru2: 1.0,
    };
    let mut cfg = SimConfig::new(8, rates, 0, 11).unwrap();
    cfg.eps = [0.2, 0.0, 0.25, 0.0];
    let code = gen_code(&source, &aux, &cfg).unwrap();
    let y = vec![0u8, 1, 1, 0, 0, 1, 0, 1];
    c.bench_function("encode n=8", |b| {
        b.iter(|| encode(black_box(&y), 0, &code, &cfg))
    });
    let enc1 = encode(&y, 0, &code, &cfg);
    let enc2 = encode(&y, 1, &code, &cfg);
    c.bench_function("decode n=8", |b| {
        b.iter(|| decode(black_box((enc1.b, enc1.w, enc2.b, enc2.w)), &code, &cfg))
    });
}

criterion_group!(
    benches,
    bench_evaluators,
    bench_gaussian,
    bench_search_step,
    bench_codesim
);
criterion_main!(benches);
