use std::hint::black_box;

use afe_bench::{embeddings, noise, normalized_mel, pattern};
use afe_core::metrics::{fid, lpips, psnr, ssim, FeatureSet, GridStatsEmbedder, SsimConfig};
use afe_core::{
    align, encode_reference, log_mel_spectrogram, resample, AlignConfig, MelConfig, ReferenceEncoderParams,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn front_end(c: &mut Criterion) {
    let cfg = MelConfig::default();
    let mut g = c.benchmark_group("mel");
    for secs in [1.0, 5.0, 30.0] {
        let audio = noise(secs);
        g.throughput(Throughput::Elements(audio.len() as u64));
        g.bench_with_input(BenchmarkId::from_parameter(secs), &audio, |b, a| {
            b.iter(|| log_mel_spectrogram(black_box(a), &cfg).unwrap())
        });
    }
    g.finish();

    let audio = resample(&noise(5.0), 22050).unwrap();
    c.bench_function("resample 22.05k->16k 5s", |b| {
        b.iter(|| resample(black_box(&audio), 16000).unwrap())
    });
}

fn encoder_and_aligner(c: &mut Criterion) {
    let params = ReferenceEncoderParams::whisper_tiny(0);
    let mut g = c.benchmark_group("encode");
    for secs in [1.0, 5.0, 30.0] {
        let mel = normalized_mel(secs);
        g.bench_with_input(BenchmarkId::from_parameter(secs), &mel, |b, m| {
            b.iter(|| encode_reference(black_box(m), &params).unwrap())
        });
    }
    g.finish();

    let e = embeddings(30.0);
    c.bench_function("align 30s", |b| {
        b.iter(|| align(black_box(&e), &AlignConfig::default()).unwrap())
    });
}

fn metrics(c: &mut Criterion) {
    let (a, b) = (pattern(256, 256, 0), pattern(256, 256, 3));
    c.bench_function("psnr 256x256", |bch| {
        bch.iter(|| psnr(black_box(&a), black_box(&b)).unwrap())
    });
    let cfg = SsimConfig::default();
    c.bench_function("ssim 256x256", |bch| {
        bch.iter(|| ssim(black_box(&a), black_box(&b), &cfg).unwrap())
    });
    let emb = GridStatsEmbedder::default();
    c.bench_function("lpips 256x256", |bch| {
        bch.iter(|| lpips(black_box(&a), black_box(&b), &emb).unwrap())
    });

    let rows = |shift: f64| -> Vec<Vec<f64>> {
        (0..512)
            .map(|i| (0..64).map(|j| ((i * 7 + j * 13) % 97) as f64 / 97.0 + shift).collect())
            .collect()
    };
    let (r, g) = (
        FeatureSet::from_samples(&rows(0.0)).unwrap(),
        FeatureSet::from_samples(&rows(0.1)).unwrap(),
    );
    c.bench_function("fid d=64", |bch| {
        bch.iter(|| fid(black_box(&r), black_box(&g)).unwrap())
    });
}

criterion_group!(benches, front_end, encoder_and_aligner, metrics);
criterion_main!(benches);
