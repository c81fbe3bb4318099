use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dstump::harness::{recovery_fraction_random_models, Method, ModelTemplate};
use dstump::permutation::recover_unknown_s_with;
use dstump::stump::score_all_with;
use dstump::synth::{gen_dataset, gen_model, DesignDistribution};
use dstump::{Execution, SplitStrategy, Stream};

const POLICIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn score_all_bench(c: &mut Criterion) {
    let spec = gen_model(
        200,
        10,
        0.5,
        1.5,
        DesignDistribution::Uniform01,
        0.1,
        Stream::new(0),
    )
    .unwrap();
    let data = gen_dataset(&spec, 2000, Stream::new(1)).unwrap();
    let mut group = c.benchmark_group("score_all/n2000_p200");
    for strategy in [
        SplitStrategy::Median,
        SplitStrategy::Optimal,
        SplitStrategy::LeftOnly,
    ] {
        for (name, exec) in POLICIES {
            group.bench_with_input(
                BenchmarkId::new(format!("{strategy:?}"), name),
                &exec,
                |b, &exec| b.iter(|| score_all_with(black_box(&data), strategy, 7, exec).unwrap()),
            );
        }
    }
    group.finish();
}

fn unknown_s_bench(c: &mut Criterion) {
    let spec = gen_model(
        50,
        5,
        0.5,
        1.5,
        DesignDistribution::Uniform01,
        0.1,
        Stream::new(2),
    )
    .unwrap();
    let data = gen_dataset(&spec, 1000, Stream::new(3)).unwrap();
    let mut group = c.benchmark_group("recover_unknown_s/n1000_p50_T10");
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| {
            b.iter(|| {
                recover_unknown_s_with(black_box(&data), 10, SplitStrategy::Median, 1, exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn recovery_bench(c: &mut Criterion) {
    let template = ModelTemplate::linear(200, 10, DesignDistribution::Uniform01, 0.1);
    let mut group = c.benchmark_group("recovery_fraction/n500_reps25");
    group.sample_size(10);
    for method in [Method::DStumpMedian, Method::Lasso] {
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(method.name(), name), &exec, |b, &exec| {
                b.iter(|| {
                    recovery_fraction_random_models(method, &template, 500, 25, 0, exec).unwrap()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, score_all_bench, unknown_s_bench, recovery_bench);
criterion_main!(benches);
