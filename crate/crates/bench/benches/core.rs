use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ipl_core::asymptotics::{decay_exponent, extract, poincare_constant, DecayOptions, ExtractionOptions};
use ipl_core::gauge::asd_residual;
use ipl_core::models::{model_connection, ModelDomain};
use ipl_core::spectral::{jumping_points, Branch, BundleModel};
use ipl_core::{DualTorusPoint, ModelParams, Point, TorusSpec, C64};

fn semisimple() -> ipl_core::Connection {
    let p = ModelParams::semisimple(C64::new(0.1, 0.2), C64::new(1.0, -0.5), 0.25).unwrap();
    model_connection(&p, &ModelDomain::default()).unwrap()
}

fn gauge(c: &mut Criterion) {
    let conn = semisimple();
    let p = Point::new(37.0, 0.4, 1.1, 2.3);
    c.bench_function("asd_residual", |b| b.iter(|| asd_residual(conn.as_ref(), black_box(&p)).unwrap()));
}

fn asymptotics(c: &mut Criterion) {
    let conn = semisimple();
    let rings: Vec<f64> = (0..8).map(|k| 10.0 * 100f64.powf(k as f64 / 7.0)).collect();
    c.bench_function("decay_exponent_8_rings", |b| b.iter(|| decay_exponent(conn.as_ref(), black_box(&rings), &DecayOptions::default()).unwrap()));
    let opts = ExtractionOptions { instanton: false, ..ExtractionOptions::default() };
    let mut g = c.benchmark_group("extract");
    g.sample_size(10);
    g.bench_function("semisimple_default_rings", |b| b.iter(|| extract(conn.as_ref(), black_box(&opts)).unwrap()));
    g.finish();
    let t = TorusSpec::default();
    c.bench_function("poincare_constant_cutoff_8", |b| b.iter(|| poincare_constant(black_box([0.13, -0.21]), &t, 8).unwrap()));
}

fn spectral(c: &mut Criterion) {
    let t = TorusSpec::default();
    let bundle = BundleModel::rational(t, C64::new(-0.05, 0.1), C64::new(1.0, 0.5), 20.0).unwrap();
    let xi = DualTorusPoint::from_zeta(C64::new(-0.04, 0.1), &t);
    c.bench_function("jumping_points", |b| b.iter(|| jumping_points(&bundle, black_box(&xi), 20.0, 1e4, Branch::Both).unwrap()));
}

criterion_group!(benches, gauge, asymptotics, spectral);
criterion_main!(benches);
