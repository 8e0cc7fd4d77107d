use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use varmc_core::synth::{scaled_family, Goal, DEFAULT_STATE_BUDGET};
use varmc_core::{
    bundled, check_family_abstract, check_fts_brute_force, parse_feat_expr, Abstraction,
    CheckOptions, Exec,
};

fn options(exec: Exec) -> CheckOptions {
    CheckOptions {
        exec,
        ..CheckOptions::default()
    }
}

fn brute_force(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute_force_scaled");
    group.sample_size(10);
    for n in [6usize, 10] {
        let fam = scaled_family(n, &Goal::default(), DEFAULT_STATE_BUDGET).unwrap();
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &n, |b, _| {
                b.iter(|| check_fts_brute_force(&fam.fts, &fam.property, &options(exec)).unwrap())
            });
        }
    }
    group.finish();
}

fn join_scaled(c: &mut Criterion) {
    let mut group = c.benchmark_group("join_scaled");
    group.sample_size(10);
    let plan = vec![(varmc_core::FeatExpr::True, Abstraction::Join)];
    for n in [10usize, 14] {
        let fam = scaled_family(n, &Goal::default(), DEFAULT_STATE_BUDGET).unwrap();
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &n, |b, _| {
                b.iter(|| {
                    check_family_abstract(&fam.fts, &fam.property, &plan, &options(exec)).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn vending_partition(c: &mut Criterion) {
    let mut group = c.benchmark_group("vending_partition");
    let (doc, fts) = bundled::vending().unwrap();
    let phi = doc.property("P1").unwrap().clone();
    let plan = vec![
        (parse_feat_expr("c").unwrap(), Abstraction::Join),
        (parse_feat_expr("!c").unwrap(), Abstraction::Join),
    ];
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| check_family_abstract(&fts, &phi, &plan, &options(exec)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, brute_force, join_scaled, vending_partition);
criterion_main!(benches);
