use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hyperell_core::budget::Budget;
use hyperell_core::ensemble::{avg_nlevel, nlevel_sieved, phases_from_angles, EnsembleSpec, TraceSeq};
use hyperell_core::ffq::{jacobi, monic_polys};
use hyperell_core::gao::{a_value, FnSet};
use hyperell_core::lfun::l_coeffs_all;
use hyperell_core::rmt::{haar_usp, kernel_integral, KernelSpec};
use hyperell_core::testfn::TestFn;
use hyperell_core::FieldOrder;

fn field(q: u64) -> FieldOrder {
    FieldOrder::new(q).unwrap()
}

fn ffq(c: &mut Criterion) {
    let f = field(5);
    let a: Vec<_> = monic_polys(f, 4).take(200).collect();
    let b: Vec<_> = monic_polys(f, 5).step_by(7).take(200).collect();
    c.bench_function("jacobi 200x200 q=5", |bch| {
        bch.iter(|| a.iter().flat_map(|x| b.iter().map(move |y| jacobi(y.as_poly(), x) as i64)).sum::<i64>())
    });
}

fn lfun(c: &mut Criterion) {
    c.bench_function("l_coeffs_all q=3 deg 7", |b| b.iter(|| l_coeffs_all(field(3), 7, Budget::unlimited()).unwrap()));
}

fn ensemble(c: &mut Criterion) {
    let fs = vec![TestFn::triangle(0.8).unwrap(), TestFn::sinc4(0.6).unwrap()];
    let spec = EnsembleSpec::exhaustive(field(3), 3);
    c.bench_function("avg_nlevel H(7,3) n=2", |b| b.iter(|| avg_nlevel(&spec, &fs, 256, Budget::default()).unwrap()));
    let ph = phases_from_angles((1..=8).map(|k| 0.37 * k as f64).collect());
    let ts = TraceSeq::from_phases(&ph, 32);
    c.bench_function("nlevel_sieved g=8 n=2", |b| b.iter(|| nlevel_sieved(black_box(&ts), &fs).unwrap()));
}

fn gao(c: &mut Criterion) {
    let fs = vec![TestFn::sinc4(0.9).unwrap(), TestFn::triangle(0.7).unwrap()];
    let set = FnSet::new(fs.clone()).unwrap();
    c.bench_function("A(f) n=2", |b| b.iter(|| a_value(&set).unwrap()));
    c.bench_function("kernel integral n=2", |b| b.iter(|| kernel_integral(&fs, &KernelSpec::new(2)).unwrap()));
}

fn rmt(c: &mut Criterion) {
    let mut seed = 0u64;
    c.bench_function("haar_usp g=10", |b| {
        b.iter(|| {
            seed += 1;
            haar_usp(10, seed).unwrap()
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = ffq, lfun, ensemble, gao, rmt
}
criterion_main!(benches);
