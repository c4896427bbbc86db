use std::hint::black_box;

use criterion::{Criterion, criterion_group, criterion_main};
use gadmp::datasets::{self, LiftConfig};
use gadmp::manifold::{self, ManifoldDescriptor, ManifoldPoint};
use gadmp::{DmpGains, ManifoldTrajectory, dmp};

const KINDS: [&str; 8] = ["euclidean:3", "sphere:2", "quat", "so:3", "so:4", "spd:2", "spd:3", "product(euclidean:3,quat)"];

/// A fixed off-identity point: exp of a small deterministic tangent.
fn point(d: &ManifoldDescriptor, seed: f64) -> ManifoldPoint {
    let id = ManifoldPoint::identity(d);
    let v = manifold::log_map(&id, &id).unwrap();
    let v: Vec<f64> = (0..v.coords.len()).map(|i| 0.2 * (seed + i as f64).sin()).collect();
    manifold::exp_map(&id, &v).unwrap()
}

fn maps(c: &mut Criterion) {
    let mut group = c.benchmark_group("maps");
    for kind in KINDS {
        let d: ManifoldDescriptor = kind.parse().unwrap();
        let p = point(&d, 1.0);
        let q = point(&d, 2.5);
        let v = manifold::log_map(&p, &q).unwrap();
        group.bench_function(format!("log/{kind}"), |b| b.iter(|| manifold::log_map(black_box(&p), black_box(&q))));
        group.bench_function(format!("exp/{kind}"), |b| b.iter(|| manifold::exp_map(black_box(&p), black_box(&v.coords))));
    }
    group.finish();
}

fn demo(kind: &str) -> ManifoldTrajectory {
    let planar = datasets::fixture("gshape").unwrap();
    let target: ManifoldDescriptor = kind.parse().unwrap();
    if target == ManifoldDescriptor::Euclidean(2) {
        return planar.to_manifold().unwrap();
    }
    let curve = datasets::add_z_axis(&planar);
    let cfg = LiftConfig::for_curve(target, &curve).unwrap();
    datasets::lift_to_manifold(&planar.times(), &curve, &cfg).unwrap()
}

fn learning(c: &mut Criterion) {
    let mut group = c.benchmark_group("dmp");
    group.sample_size(20);
    for kind in ["euclidean:2", "quat", "spd:2"] {
        let traj = demo(kind);
        let gains = DmpGains::new(25.0, traj.duration()).unwrap();
        group.bench_function(format!("fit/{kind}"), |b| b.iter(|| dmp::fit(black_box(&traj), None, &gains, 60)));
        let model = dmp::fit(&traj, None, &gains, 60).unwrap();
        let start = traj.first().unwrap().clone();
        group.bench_function(format!("rollout/{kind}"), |b| {
            b.iter(|| dmp::rollout(black_box(&model), &start, gains.tau, 1e-3, &[]))
        });
    }
    group.finish();
}

criterion_group!(benches, maps, learning);
criterion_main!(benches);
