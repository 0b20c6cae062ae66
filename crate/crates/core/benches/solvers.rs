use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mrfqubo::onehot::{default_epsilon, encode_one_hot};
use mrfqubo::solve::{solve_chain_dp, solve_sa, solve_sa_seq, SaParams};
use mrfqubo::stereo::{stereo_match, stereo_match_seq, synthetic_line_mrf, synthetic_scene, SolverConfig, StereoConfig};

fn sa_reads(c: &mut Criterion) {
    let mrf = synthetic_line_mrf(108, 6, 1).unwrap();
    let q = encode_one_hot(&mrf, default_epsilon(&mrf), 1.0).unwrap();
    let mut group = c.benchmark_group("sa_line_108x6");
    group.sample_size(10);
    for reads in [16, 64] {
        let params = SaParams {
            reads,
            sweeps: 200,
            ..SaParams::default()
        };
        group.bench_with_input(BenchmarkId::new("parallel", reads), &params, |b, p| {
            b.iter(|| solve_sa(black_box(&q), p).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", reads), &params, |b, p| {
            b.iter(|| solve_sa_seq(black_box(&q), p).unwrap())
        });
    }
    group.finish();
}

fn chain_dp(c: &mut Criterion) {
    let mrf = synthetic_line_mrf(434, 6, 1).unwrap();
    c.bench_function("chain_dp_line_434x6", |b| b.iter(|| solve_chain_dp(black_box(&mrf)).unwrap()));
}

fn pipeline(c: &mut Criterion) {
    let pair = synthetic_scene("synthetic-tsukuba").unwrap();
    let mut group = c.benchmark_group("stereo_tsukuba");
    group.sample_size(10);
    let mut sa = StereoConfig::middlebury();
    sa.solver = SolverConfig::Sa { reads: 4, sweeps: 50 };
    for (name, cfg) in [("chain-dp", StereoConfig::middlebury()), ("sa", sa)] {
        group.bench_with_input(BenchmarkId::new("parallel", name), &cfg, |b, cfg| {
            b.iter(|| stereo_match(&pair.left, &pair.right, cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", name), &cfg, |b, cfg| {
            b.iter(|| stereo_match_seq(&pair.left, &pair.right, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sa_reads, chain_dp, pipeline);
criterion_main!(benches);
