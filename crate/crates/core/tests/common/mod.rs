#![allow(dead_code)]

use std::f64::consts::PI;

use gadmp::manifold::{exp_map, ManifoldDescriptor, ManifoldPoint};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut StdRng) -> f64 {
    // Box-Muller; enough for test sampling.
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn gaussian_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

fn unit(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let v = gaussian_vec(rng, n);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Random SPD matrix with eigenvalues in [0.3, 3].
pub fn random_spd(rng: &mut StdRng, m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| gaussian(rng));
    let q = a.qr().q();
    let eig = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| rng.random_range(0.3..3.0)));
    let s = &q * eig * q.transpose();
    (&s + s.transpose()) * 0.5
}

pub fn random_point(rng: &mut StdRng, d: &ManifoldDescriptor) -> ManifoldPoint {
    let data = match d {
        ManifoldDescriptor::Euclidean(m) => gaussian_vec(rng, *m).into_iter().map(|x| 3.0 * x).collect(),
        ManifoldDescriptor::Sphere(m) => unit(rng, m + 1),
        ManifoldDescriptor::UnitQuaternion => unit(rng, 4),
        ManifoldDescriptor::SpecialOrthogonal(_) => {
            let id = ManifoldPoint::identity(d);
            let v = random_tangent(rng, d, &id, 3.0);
            return exp_map(&id, &v).unwrap();
        }
        ManifoldDescriptor::Spd(m) => {
            let s = random_spd(rng, *m);
            (0..*m).flat_map(|i| (0..*m).map(move |j| (i, j))).map(|(i, j)| s[(i, j)]).collect()
        }
        ManifoldDescriptor::Product(parts) => {
            let pts: Vec<ManifoldPoint> = parts.iter().map(|p| random_point(rng, p)).collect();
            return ManifoldPoint::stack(&pts).unwrap();
        }
    };
    ManifoldPoint::new(d.clone(), data).unwrap()
}

/// Random tangent vector at `p` with norm uniform in (0, max_norm]. Sphere
/// vectors are projected onto the tangent space before scaling. Product
/// vectors draw each block independently.
pub fn random_tangent(rng: &mut StdRng, d: &ManifoldDescriptor, p: &ManifoldPoint, max_norm: f64) -> Vec<f64> {
    if let ManifoldDescriptor::Product(parts) = d {
        let comps = p.components();
        return parts
            .iter()
            .zip(&comps)
            .flat_map(|(dp, pp)| random_tangent(rng, dp, pp, max_norm / (parts.len() as f64).sqrt()))
            .collect();
    }
    let mut v = gaussian_vec(rng, d.tangent_dim());
    if let ManifoldDescriptor::Sphere(_) = d {
        let dot: f64 = v.iter().zip(p.data()).map(|(a, b)| a * b).sum();
        for (vi, pi) in v.iter_mut().zip(p.data()) {
            *vi -= dot * pi;
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = rng.random_range(0.0..1.0f64).max(1e-3) * max_norm;
    v.into_iter().map(|x| x / norm * target).collect()
}

/// Largest tangent norm used for random round trips: 0.9 of the chart
/// radius, with SPD and Euclidean capped at 3.
pub fn round_trip_radius(d: &ManifoldDescriptor) -> f64 {
    d.injectivity_radius().map(|r| 0.9 * r).unwrap_or(3.0)
}

/// Every manifold kind exercised by the property suites.
pub fn all_kinds() -> Vec<ManifoldDescriptor> {
    [
        "euclidean:3",
        "sphere:2",
        "sphere:3",
        "quat",
        "so:2",
        "so:3",
        "so:4",
        "spd:2",
        "spd:3",
        "product(euclidean:2,spd:2)",
        "product(euclidean:3,quat,spd:3)",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
