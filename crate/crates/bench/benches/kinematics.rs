use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use metaswim_core::geartrain::{chain_forward, robot_chains, GearChain};
use metaswim_core::kinematics::{pleopod_tip, tip_trajectory};
use metaswim_core::schedule::{build_schedule, ScheduleOptions};
use metaswim_core::validation::{angles_from_markers, markers_for_pose};
use metaswim_core::{AppendageGeometry, MarkerTrace, MetachronalConfig, StrokeProfile, Vec2};

fn profiles() -> (StrokeProfile, StrokeProfile) {
    (
        StrokeProfile::new(58.5, 78.0, 0.57, 0.0).unwrap(),
        StrokeProfile::new(133.5, 48.0, 0.57, 0.5).unwrap(),
    )
}

fn bench_tip(c: &mut Criterion) {
    let geom = AppendageGeometry::robot_p1();
    c.bench_function("pleopod_tip", |b| {
        b.iter(|| pleopod_tip(&geom, black_box(61.0), black_box(128.0)).unwrap())
    });

    let (a, beta) = profiles();
    let mut group = c.benchmark_group("tip_trajectory");
    for n in [200usize, 2000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| tip_trajectory(&geom, &a, &beta, n).unwrap())
        });
    }
    group.finish();
}

fn bench_chain(c: &mut Criterion) {
    let chain = GearChain::from_radii(vec![0.005, 0.007, 0.004, 0.006, 0.005, 0.008]).unwrap();
    c.bench_function("chain_forward_k6", |b| {
        b.iter(|| chain_forward(black_box(0.3), black_box(-0.1), &chain))
    });
}

fn bench_schedule(c: &mut Criterion) {
    let cfg = MetachronalConfig::default();
    let chains = robot_chains(cfg.n_appendages);
    let opts = ScheduleOptions::default();
    c.bench_function("build_schedule_10s", |b| {
        b.iter(|| build_schedule(&cfg, &chains, black_box(10.0), &opts).unwrap())
    });
}

fn bench_markers(c: &mut Criterion) {
    let geom = AppendageGeometry::robot_p1();
    let (a, beta) = profiles();
    let frames = (0..10_000)
        .map(|i| {
            let t = i as f64 / 1000.0;
            markers_for_pose(&geom, a.sample(t), beta.sample(t), t)
                .unwrap()
                .transformed(0.3, 1500.0, Vec2::new(320.0, 240.0))
        })
        .collect();
    let trace = MarkerTrace { frames };
    c.bench_function("angles_from_markers_10k", |b| {
        b.iter(|| angles_from_markers(black_box(&trace)).unwrap())
    });
}

criterion_group!(benches, bench_tip, bench_chain, bench_schedule, bench_markers);
criterion_main!(benches);
