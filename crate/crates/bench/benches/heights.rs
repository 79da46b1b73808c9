use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hauteur_core::arith::int;
use hauteur_core::bottcher::correction_data;
use hauteur_core::ffheight::{divisor, DEFAULT_FF_CAP};
use hauteur_core::spec_height::{global_height, specialize};
use hauteur_core::{parse_dynpair, ClosedPoint, HeightCaps, HeightPresentation, Rational};

fn bench_divisor(c: &mut Criterion) {
    let fp = parse_dynpair("z^2 + t", "7*t + 1/t").unwrap();
    c.bench_function("divisor z^2+t, 7t+1/t", |b| {
        b.iter(|| divisor(black_box(&fp), DEFAULT_FF_CAP).unwrap())
    });
    let fp = parse_dynpair("z^3 - t*z + 1", "t^2").unwrap();
    c.bench_function("divisor z^3-tz+1, t^2", |b| {
        b.iter(|| divisor(black_box(&fp), DEFAULT_FF_CAP).unwrap())
    });
}

fn bench_series(c: &mut Criterion) {
    let fp = parse_dynpair("z^2 + t", "0").unwrap();
    let hp = HeightPresentation::new(&divisor(&fp, DEFAULT_FF_CAP).unwrap().divisor, 2).unwrap();
    let mut g = c.benchmark_group("correction series z^2+t, 0");
    for order in [6usize, 12] {
        g.bench_function(format!("order {order}"), |b| {
            b.iter(|| correction_data(&fp, &ClosedPoint::Infinity, &hp, black_box(order)).unwrap())
        });
    }
    g.finish();
}

fn bench_heights(c: &mut Criterion) {
    let fp = parse_dynpair("z^2 + t", "7*t + 1/t").unwrap();
    let caps = HeightCaps::default();
    let mut g = c.benchmark_group("global height z^2+t, 7t+1/t");
    for (label, t) in [
        ("t = 7^5", int(16807)),
        ("t = 10^4/7^4", Rational::new(10_000.into(), 2401.into())),
    ] {
        let sys = specialize(&fp, &t).unwrap();
        g.bench_function(label, |b| {
            b.iter(|| global_height(black_box(&sys), 1e-10, caps).unwrap())
        });
    }
    g.finish();

    let fp = parse_dynpair("z^2 + t", "0").unwrap();
    let params: Vec<Rational> = (1..=10i64)
        .flat_map(|b| (-10..=10i64).map(move |a| Rational::new(a.into(), b.into())))
        .collect();
    c.bench_function("sweep z^2+t, 0, |a|,b <= 10", |b| {
        b.iter(|| {
            for t in &params {
                let sys = specialize(&fp, t).unwrap();
                black_box(global_height(&sys, 1e-10, caps).unwrap());
            }
        })
    });
}

criterion_group!(benches, bench_divisor, bench_series, bench_heights);
criterion_main!(benches);
