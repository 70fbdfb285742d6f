use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use twl_bench::{mid_geometry, mid_pose, prepared, reference};
use twl_core::{channel_fim, run_cdf, Initiator, LinkDirection, Protocol, ProtocolSpec};

fn channel(c: &mut Criterion) {
    let p = prepared();
    let cg = mid_geometry(&p);
    c.bench_function("channel_fim 144x144, 25 beams", |b| {
        b.iter(|| {
            channel_fim(
                LinkDirection::Backward,
                &p.ue,
                &p.bs,
                &p.ue_tx,
                &p.bs_rx,
                black_box(&cg),
                &p.signal,
            )
            .unwrap()
        })
    });
}

fn protocols(c: &mut Criterion) {
    let p = prepared();
    let pose = mid_pose();
    for kind in Protocol::ALL {
        let spec = ProtocolSpec::new(kind, Initiator::Bs);
        c.bench_function(&format!("evaluate {spec}"), |b| {
            b.iter(|| p.evaluate(black_box(&pose), spec).unwrap())
        });
    }
}

fn cdf(c: &mut Criterion) {
    let s = reference(200);
    let mut group = c.benchmark_group("run_cdf");
    group.sample_size(10);
    group.bench_function("200 positions, 5 protocols", |b| {
        b.iter(|| run_cdf(black_box(&s)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, channel, protocols, cdf);
criterion_main!(benches);
