use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use simpson_core::golden;
use simpson_core::paradox_bn::{self, ParadoxBnSpec};
use simpson_core::rct_design::{self, DesignSpec};
use simpson_core::tables::{self, Outcome, Treatment};
use simpson_core::trial_sim;

fn tables_bench(c: &mut Criterion) {
    let t6 = golden::table6();
    let treat = Treatment::new("Drug", "Yes", "No");
    let out = Outcome::new("Recovered", "Yes");
    c.bench_function("detect_reversal table6 {Age,Sex}", |b| {
        b.iter(|| tables::detect_reversal(black_box(&t6), &treat, &out, &["Age", "Sex"]).unwrap())
    });
    c.bench_function("scan_confounders table6", |b| {
        b.iter(|| tables::scan_confounders(black_box(&t6), &treat, &out, 2).unwrap())
    });

    let spec = ParadoxBnSpec::canonical(6);
    let sim = trial_sim::to_table(&trial_sim::sample(&spec, 50_000, 1).unwrap()).unwrap();
    let treat = Treatment::new("Drug", "true", "false");
    let out = Outcome::new("Recovered", "true");
    c.bench_function("scan_confounders simulated n=6 bound 3", |b| {
        b.iter(|| tables::scan_confounders(black_box(&sim), &treat, &out, 3).unwrap())
    });
}

fn network_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_joint");
    group.sample_size(20);
    for n in [4usize, 8, 12, 16] {
        let spec = ParadoxBnSpec::canonical(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, s| {
            b.iter(|| paradox_bn::exact_joint(black_box(s)).unwrap())
        });
    }
    group.finish();

    let spec = ParadoxBnSpec::canonical(1000);
    c.bench_function("certify_reversal n=1000", |b| {
        b.iter(|| paradox_bn::certify_reversal(black_box(&spec)).unwrap())
    });
}

fn sampling_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample");
    group.sample_size(10);
    for size in [10_000usize, 100_000] {
        let spec = ParadoxBnSpec::canonical(2);
        group.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, &size| {
            b.iter(|| trial_sim::sample(&spec, size, 7).unwrap())
        });
    }
    group.finish();
}

fn design_bench(c: &mut Criterion) {
    let spec = DesignSpec::binary(20, 50);
    c.bench_function("subjects_required 20 binary", |b| {
        b.iter(|| rct_design::subjects_required(black_box(&spec)).unwrap())
    });
    let spec = DesignSpec::binary(16, 1);
    c.bench_function("allocate 2^16 groups", |b| {
        b.iter(|| rct_design::allocate(black_box(&spec), 1 << 16).unwrap())
    });
}

criterion_group!(
    benches,
    tables_bench,
    network_bench,
    sampling_bench,
    design_bench
);
criterion_main!(benches);
