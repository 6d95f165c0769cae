use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lshan::corpus::{generate_synthetic, SyntheticConfig};
use lshan::han::{coherence_grad, greedy_decode, kbest_decode};
use lshan::latent_space::{dtw, relevance_grad, WindowPolicy};
use lshan::trainer::{joint_grad, Model, ModelDims};
use lshan::{Dataset, Strategy, TrainingConfig};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(hidden: usize) -> (Dataset, Model) {
    let data = generate_synthetic(&SyntheticConfig { instances: 8, ..SyntheticConfig::default() }).unwrap();
    let dims = ModelDims { feature: 16, vocab: data.vocab.len(), latent: 16, hidden, attention: 16 };
    let model = Model::init(dims, Strategy::default(), &mut ChaCha8Rng::seed_from_u64(1));
    (data, model)
}

fn bench_dtw(c: &mut Criterion) {
    let mut group = c.benchmark_group("dtw");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (n, m) in [(14, 5), (28, 7), (80, 20)] {
        let a = Array2::from_shape_fn((n, 16), |_| rng.random_range(-1.0..1.0));
        let b = Array2::from_shape_fn((m, 16), |_| rng.random_range(-1.0..1.0));
        let policy = WindowPolicy::default_for(n, m).unwrap();
        group.bench_with_input(BenchmarkId::new("full", format!("{n}x{m}")), &(), |bench, _| {
            bench.iter(|| dtw(a.view(), b.view(), None).unwrap().distance())
        });
        group.bench_with_input(BenchmarkId::new("windowed", format!("{n}x{m}")), &(), |bench, _| {
            bench.iter(|| dtw(a.view(), b.view(), Some(&policy)).unwrap().distance())
        });
    }
    group.finish();
}

fn bench_gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient");
    for hidden in [16, 64] {
        let (data, model) = fixture(hidden);
        let inst = &data.instances[0];
        group.bench_function(BenchmarkId::new("relevance", hidden), |b| {
            b.iter(|| relevance_grad(&inst.clips, &inst.sentence, &model.latent, true).unwrap())
        });
        group.bench_function(BenchmarkId::new("coherence", hidden), |b| {
            b.iter(|| {
                coherence_grad(&model.han, &model.latent, &inst.clips, &inst.sentence, model.strategy).unwrap()
            })
        });
        let batch: Vec<_> = data.instances.iter().collect();
        let cfg = TrainingConfig::default();
        group.bench_function(BenchmarkId::new("joint_batch8", hidden), |b| {
            b.iter(|| joint_grad(&batch, &model, &cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_decode(c: &mut Criterion) {
    let mut group = c.benchmark_group("decode");
    let (data, model) = fixture(16);
    let inst = &data.instances[0];
    let n = inst.clips.len();
    group.bench_function("greedy", |b| {
        b.iter(|| greedy_decode(&model.han, &model.latent, &inst.clips, model.strategy, n).unwrap())
    });
    for k in [1, 5] {
        group.bench_function(BenchmarkId::new("beam", k), |b| {
            b.iter(|| kbest_decode(&model.han, &model.latent, &inst.clips, model.strategy, k, n).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_dtw, bench_gradients, bench_decode);
criterion_main!(benches);
