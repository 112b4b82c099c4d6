//! Each kernel runs twice: on rayon's default pool and on a one-thread pool.
//! Without the `parallel` feature both variants are sequential.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use palynseg::imgcore::{FloatImage, Raster};
use palynseg::phantom::{generate, random_spec};
use palynseg::preproc::{anisotropic_diffuse, clahe, gradient_energy, PreprocConfig};
use palynseg::snake::gvf;
use palynseg::{segment_image, PipelineConfig};
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    vec![
        ("default", ThreadPoolBuilder::new().build().unwrap()),
        ("1-thread", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn phantom(size: usize) -> Raster {
    generate(&random_spec(3, size, size, 2)).unwrap().0
}

fn kernels(c: &mut Criterion) {
    let img = phantom(512);
    let cfg = PreprocConfig::default();
    let float = FloatImage::from_raster(&img);
    let energy = gradient_energy(&img);
    let mut group = c.benchmark_group("kernels");
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("clahe", name), &img, |b, img| {
            b.iter(|| pool.install(|| clahe(img, &cfg)))
        });
        group.bench_with_input(BenchmarkId::new("diffusion", name), &float, |b, f| {
            b.iter(|| pool.install(|| anisotropic_diffuse(f, &cfg)))
        });
        group.bench_with_input(BenchmarkId::new("gvf", name), &energy, |b, e| {
            b.iter(|| pool.install(|| gvf(e, 0.01, 200)))
        });
    }
    group.finish();
}

fn end_to_end(c: &mut Criterion) {
    let img = phantom(1024);
    let cfg = PipelineConfig::default();
    let mut group = c.benchmark_group("segment_image_1024");
    group.sample_size(10).measurement_time(Duration::from_secs(30));
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &img, |b, img| {
            b.iter(|| pool.install(|| segment_image(img, &cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels, end_to_end);
criterion_main!(benches);
