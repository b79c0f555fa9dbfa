use std::hint::black_box;

use advseg_bench::{intervals, loaded_tree, local_intervals, reservations, shapes};
use advseg_core::Finger;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const FILL: usize = 2_000;
const BATCH: usize = 1_024;

fn insert_delete(c: &mut Criterion) {
    let mut group = c.benchmark_group("insert_delete");
    for (name, cfg) in shapes() {
        let mut tree = loaded_tree(&cfg, FILL, 1);
        let batch = reservations(cfg.leaves(), BATCH, 2);
        let mut i = 0;
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| {
                let r = &batch[i % BATCH];
                i += 1;
                tree.insert(r).unwrap();
                tree.delete(r).unwrap();
            })
        });
    }
    group.finish();
}

fn max_reserved(c: &mut Criterion) {
    let mut group = c.benchmark_group("max_reserved");
    for (name, cfg) in shapes() {
        let tree = loaded_tree(&cfg, FILL, 1);
        let queries = intervals(cfg.leaves(), BATCH, 3);
        let mut i = 0;
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter(|| {
                i += 1;
                black_box(tree.max_reserved(queries[i % BATCH]).unwrap())
            })
        });
    }
    group.finish();
}

fn insert_checked(c: &mut Criterion) {
    let mut group = c.benchmark_group("insert_checked");
    for (name, cfg) in shapes() {
        let tree = loaded_tree(&cfg, FILL, 1);
        let capacity = tree
            .max_reserved(advseg_core::Interval::new(0, cfg.leaves()).unwrap())
            .unwrap();
        let batch = reservations(cfg.leaves(), BATCH, 4);
        let mut i = 0;
        // capacity at the current peak: a mix of admissions and rejections
        group.bench_function(BenchmarkId::from_parameter(&name), |b| {
            b.iter_batched_ref(
                || tree.clone(),
                |t| {
                    i += 1;
                    black_box(t.insert_checked(&batch[i % BATCH], capacity).unwrap())
                },
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn local_queries(c: &mut Criterion) {
    let mut group = c.benchmark_group("local_queries");
    for (name, cfg) in shapes() {
        let tree = loaded_tree(&cfg, FILL, 1);
        let queries = local_intervals(cfg.leaves(), BATCH, 5);
        group.bench_function(BenchmarkId::new("root", &name), |b| {
            b.iter(|| {
                for q in &queries {
                    black_box(tree.max_reserved(*q).unwrap());
                }
            })
        });
        group.bench_function(BenchmarkId::new("finger", &name), |b| {
            b.iter(|| {
                let mut finger = Finger::new();
                for q in &queries {
                    black_box(finger.query(&tree, *q).unwrap());
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, insert_delete, max_reserved, insert_checked, local_queries);
criterion_main!(benches);
