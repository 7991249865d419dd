use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qiren::models::{build_model, Family, ModelConfig};
use qiren::tasks::two_tone;

/// One full-batch forward + backward pass per family on 256 points.
fn epoch(c: &mut Criterion) {
    let data = two_tone(256).unwrap();
    let mut g = c.benchmark_group("backprop_256");
    g.sample_size(10);
    for family in Family::ALL {
        let mut model = build_model(&ModelConfig::new(family, 1, 1)).unwrap();
        g.bench_function(family.name(), |b| {
            b.iter(|| model.stack.backprop(black_box(&data.coords), &data.values).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, epoch);
criterion_main!(benches);
