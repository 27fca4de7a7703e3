use criterion::{criterion_group, criterion_main};

criterion_group!(benches, stretch_bench::factor, stretch_bench::enumeration, stretch_bench::geodesics, stretch_bench::busemann);
criterion_main!(benches);
