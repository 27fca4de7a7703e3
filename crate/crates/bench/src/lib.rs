//! Timing of the inner kernels: factor evaluation, class enumeration,
//! closed geodesic solves and Busemann segments.

use std::hint::black_box;
use std::sync::Arc;

use criterion::Criterion;
use stretch_core::busemann::{segment, BusemannOptions};
use stretch_core::fuchsian::EnumerateOptions;
use stretch_core::geodesics::{closed_length, shortest_classes, NPolicy, SolverOptions};
use stretch_core::verify::config_b;
use stretch_core::{ConformalFactor, ConformalMetric, FuchsianGroup, Su11, C64};

fn metric() -> ConformalMetric {
    ConformalMetric::new(Arc::new(ConformalFactor::new(&config_b()).expect("factor")), 0.02).expect("metric")
}

pub fn factor(c: &mut Criterion) {
    let m = metric();
    let x = C64::new(0.31, -0.12);
    c.bench_function("phi_jet", |b| b.iter(|| m.phi.jet(black_box(x))));
    c.bench_function("phi_jet_far", |b| b.iter(|| m.phi.jet(black_box(C64::new(0.97, 0.1)))));
}

pub fn enumeration(c: &mut Criterion) {
    let g = FuchsianGroup::bolza();
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(10);
    for cap in [6.0, 8.0] {
        group.bench_function(format!("cap_{cap}"), |b| b.iter(|| g.enumerate_classes(black_box(cap), &EnumerateOptions::default())));
    }
    group.finish();
}

pub fn geodesics(c: &mut Criterion) {
    let m = metric();
    let classes = shortest_classes(m.phi.group(), 40).expect("classes");
    let mut group = c.benchmark_group("closed_length");
    group.sample_size(20);
    for cl in [&classes[0], &classes[39]] {
        let n = NPolicy::default().nodes(cl.l0);
        group.bench_function(format!("l0_{:.2}", cl.l0), |b| b.iter(|| closed_length(&m, &cl.word, n, &SolverOptions::default())));
    }
    group.finish();
}

pub fn busemann(c: &mut Criterion) {
    let m = metric();
    let from = Su11::frame(C64::new(0.1, 0.2), 0.4);
    let to = from.mul(&Su11::translation(20.0)).mul(&Su11::rotation(0.3));
    let opts = BusemannOptions::default();
    let mut group = c.benchmark_group("busemann");
    group.sample_size(20);
    group.bench_function("segment_20", |b| b.iter(|| segment(&m, black_box(&from), &to, &opts)));
    group.finish();
}
