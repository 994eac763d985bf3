use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bregproj_bench::warmed_kserver;
use bregproj_core::bregman::project;
use bregproj_core::offline::opt_kserver;
use bregproj_core::paging::{paging_initial, paging_project, PagingParams};

fn kserver_projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("kserver_projection");
    for (branching, depth) in [(4usize, 1usize), (2, 3), (3, 2), (2, 4)] {
        let n = branching.pow(depth as u32);
        let (state, r) = warmed_kserver(branching, depth, n / 2, n / 4 + 1, 20, 7);
        let spec = state.spec().with_request(r);
        let params = state.params();
        group.bench_with_input(BenchmarkId::new("hst", format!("b{branching}_d{depth}")), &r, |b, _| {
            b.iter(|| project(black_box(&state.x), &spec, &params, &state.options).unwrap())
        });
    }
    group.finish();
}

fn paging_projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("paging_projection");
    for n in [8usize, 64, 512] {
        let weights: Vec<f64> = (0..n).map(|i| 1.0 + (i % 17) as f64).collect();
        let params = PagingParams::new(weights, n / 2, n / 4).unwrap();
        let cache: Vec<usize> = (0..n / 2).collect();
        let a = paging_initial(&params, &cache).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| paging_project(black_box(&a), n - 1, &params).unwrap())
        });
    }
    group.finish();
}

fn offline_dp(c: &mut Criterion) {
    let (state, _) = warmed_kserver(2, 3, 3, 2, 0, 3);
    let requests: Vec<usize> = (0..30).map(|t| (t * 5) % 8).collect();
    c.bench_function("opt_kserver_b2_d3_h2_t30", |b| {
        b.iter(|| opt_kserver(&state.tree, 2, black_box(&requests), &[0, 1]).unwrap())
    });
}

criterion_group!(benches, kserver_projection, paging_projection, offline_dp);
criterion_main!(benches);
