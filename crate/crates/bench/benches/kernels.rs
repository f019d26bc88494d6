use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use photonscan_core::harness::presets::CLASS_SIGNATURES;
use photonscan_core::inference::{matched_filter_log_scores, Engine, InferenceConfig};
use photonscan_core::reconstruct::{inpaint, SparseField};
use photonscan_core::rng::{stream, StreamLabel};
use photonscan_core::sampler::{mh_sample_locations, MhConfig};
use photonscan_core::scene::{Irf, SpectralLibrary};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

fn histogram(bins: usize, wavelengths: usize, irf: &Irf, seed: u64) -> Vec<u32> {
    let mut rng = stream(seed, StreamLabel::Test, 0, 0);
    let depth = bins / 3;
    (0..wavelengths * bins)
        .map(|i| {
            let (l, t) = (i / bins, i % bins);
            let mean = 0.02 + 10.0 * irf.channel(l)[(t + bins - depth) % bins];
            Poisson::new(mean).unwrap().sample(&mut rng) as u32
        })
        .collect()
}

fn matched_filter(c: &mut Criterion) {
    let mut g = c.benchmark_group("matched_filter");
    for bins in [191, 1500, 3000] {
        let irf = Irf::gaussian(bins, &[(4.0, 20.0)], 1e-12).unwrap();
        let y = histogram(bins, 1, &irf, 1);
        g.bench_with_input(BenchmarkId::from_parameter(bins), &bins, |b, _| {
            b.iter(|| matched_filter_log_scores(black_box(&y), irf.channel(0), 0.7))
        });
    }
    g.finish();
}

fn classify(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate_pixel");
    g.sample_size(20);
    for bins in [750, 1500] {
        let irf = Irf::gaussian(bins, &[(4.0, 20.0), (5.0, 20.0), (6.0, 22.0), (7.0, 24.0)], 2e-12).unwrap();
        let means: Vec<Vec<f64>> = CLASS_SIGNATURES.iter().map(|r| r.to_vec()).collect();
        let lib = SpectralLibrary::from_signatures(&means, 10.0, &[17.5; 4], bins, 1.0).unwrap();
        let engine = Engine::new(irf.clone(), lib, &InferenceConfig::default()).unwrap();
        let y = histogram(bins, 4, &irf, 2);
        g.bench_with_input(BenchmarkId::from_parameter(bins), &bins, |b, _| b.iter(|| engine.estimate(black_box(&y), 1.0).unwrap()));
    }
    g.finish();
}

fn inpainting(c: &mut Criterion) {
    let mut rng = stream(3, StreamLabel::Test, 0, 0);
    let side = 200;
    let values: Vec<Option<f64>> = (0..side * side).map(|_| rng.random_bool(0.1).then(|| rng.random_range(0.0..1500.0))).collect();
    let field = SparseField::from_values(side, side, values).unwrap();
    c.bench_function("inpaint_200x200_10pct", |b| b.iter(|| inpaint(black_box(&field), 3).unwrap()));
}

fn metropolis(c: &mut Criterion) {
    let mut rng = stream(4, StreamLabel::Test, 0, 0);
    let m: Vec<f64> = (0..142 * 142).map(|_| rng.random_range(0.0..1.0)).collect();
    let cfg = MhConfig::default();
    c.bench_function("mh_1024_of_142x142", |b| {
        b.iter(|| mh_sample_locations(black_box(&m), 1024, stream(5, StreamLabel::Test, 0, 0), &cfg).unwrap())
    });
}

criterion_group!(benches, matched_filter, classify, inpainting, metropolis);
criterion_main!(benches);
