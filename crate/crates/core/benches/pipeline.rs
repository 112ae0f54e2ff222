use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kinacoustic::classifier::{select_training_rows, train_svm, SvmParams, TrainingSelection};
use kinacoustic::evalsynth::{synth_recording, SynthSpec};
use kinacoustic::features::extract_segment_features;
use kinacoustic::{Exec, FeatureConfig, SegmentGrid, Standardizer};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench(c: &mut Criterion) {
    let spec = SynthSpec {
        duration_s: 120.0,
        ..SynthSpec::acceptance()
    };
    let rec = synth_recording(&spec).unwrap();
    let grid = SegmentGrid::for_streams(&rec.audio, &rec.kinematic);
    let cfg = FeatureConfig::default();

    let mut group = c.benchmark_group("extract_features_120s");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| extract_segment_features(black_box(&rec.audio), &rec.kinematic, &grid, &cfg, exec).unwrap())
        });
    }
    group.finish();

    let features = extract_segment_features(&rec.audio, &rec.kinematic, &grid, &cfg, Exec::default()).unwrap();
    let fm = kinacoustic::fusion::fuse(&features.audio, &features.kinematic).unwrap();
    let sel = TrainingSelection::from_annotations(&rec.annotations, 4, 6.0).unwrap();
    let (rows, labels) = select_training_rows(&grid, &sel).unwrap();
    let x = Standardizer::fit(&fm, &rows).unwrap().transform(&fm).unwrap().select_rows(&rows);

    let mut group = c.benchmark_group("train_svm_fused");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| train_svm(black_box(&x), &labels, &SvmParams::default(), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
