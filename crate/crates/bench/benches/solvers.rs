use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use divclust::oracle::brute_force_div;
use divclust::{build_coreset, solve_div_clustering, solve_fair, CoresetMode, Objective, Selection, SolveOptions};
use divclust_bench::{planted, uniform};

fn opts(selection: Selection) -> SolveOptions {
    SolveOptions {
        selection,
        coreset: CoresetMode::Off,
        ..SolveOptions::default()
    }
}

fn div_median(c: &mut Criterion) {
    let mut group = c.benchmark_group("div_median");
    group.sample_size(10);
    for k in [2, 3] {
        let inst = planted(60, 16, k, Objective::Median, 11);
        for sel in [Selection::LazyGreedy, Selection::Arbitrary] {
            group.bench_with_input(BenchmarkId::new(sel.as_str(), k), &inst, |b, inst| {
                b.iter(|| solve_div_clustering(black_box(inst), &opts(sel)).unwrap())
            });
        }
    }
    group.finish();
}

fn div_supplier(c: &mut Criterion) {
    let mut group = c.benchmark_group("div_supplier");
    for (clients, facilities) in [(60, 16), (200, 40)] {
        let inst = planted(clients, facilities, 4, Objective::Supplier, 12);
        group.bench_with_input(BenchmarkId::from_parameter(clients + facilities), &inst, |b, inst| {
            b.iter(|| solve_div_clustering(black_box(inst), &SolveOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn fair_vs_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("fair_supplier");
    let inst = uniform(40, 14, 3, Objective::Supplier, 13);
    let fair = divclust::DiversityInstance::new(
        inst.metric().clone(),
        vec![
            inst.metric().facilities()[..7].to_vec(),
            inst.metric().facilities()[7..].to_vec(),
        ],
        vec![2, 1],
        3,
        Objective::Supplier,
    )
    .unwrap();
    group.bench_function("reduction", |b| {
        b.iter(|| solve_fair(black_box(&fair), &SolveOptions::default()).unwrap())
    });
    group.bench_function("brute_force", |b| b.iter(|| brute_force_div(black_box(&inst)).ok()));
    group.finish();
}

fn coreset(c: &mut Criterion) {
    let inst = uniform(2000, 30, 3, Objective::Median, 14);
    c.bench_function("coreset_2000", |b| {
        b.iter(|| build_coreset(black_box(inst.metric()), 3, 0.2, 0.1, Objective::Median, 7).unwrap())
    });
}

criterion_group!(benches, div_median, div_supplier, fair_vs_exact, coreset);
criterion_main!(benches);
