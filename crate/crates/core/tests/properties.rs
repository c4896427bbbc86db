mod common;

use common::*;
use gadmp::dmp::{self, BasisSet, DmpGains, GaDmpModel};
use gadmp::io;
use gadmp::manifold::{self, distance, exp_map, geodesic_interpolate, log_map, ManifoldDescriptor, ManifoldPoint};
use gadmp::sim::{self, MsdState, PlanarArm};
use nalgebra::{DMatrix, Matrix2};
use proptest::prelude::*;
use rand::Rng;

fn kind(i: usize) -> ManifoldDescriptor {
    let kinds = all_kinds();
    kinds[i % kinds.len()].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_stays_on_manifold(seed in any::<u64>(), k in 0usize..11, scale in 0.0f64..3.0) {
        let d = kind(k);
        let mut rng = rng(seed);
        let p = random_point(&mut rng, &d);
        let v = random_tangent(&mut rng, &d, &p, scale);
        let q = exp_map(&p, &v).unwrap();
        let check = manifold::validate(&d, q.data(), manifold::VALIDATION_TOL);
        prop_assert!(check.is_valid(), "{:?}", check.violations);
    }

    #[test]
    fn log_norm_is_distance_and_symmetric(seed in any::<u64>(), k in 0usize..11) {
        let d = kind(k);
        let mut rng = rng(seed);
        let p = random_point(&mut rng, &d);
        let v = random_tangent(&mut rng, &d, &p, round_trip_radius(&d));
        let q = exp_map(&p, &v).unwrap();
        let dpq = distance(&p, &q).unwrap();
        let dqp = distance(&q, &p).unwrap();
        let lg = log_map(&p, &q).unwrap().coords;
        let n = lg.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((dpq - dqp).abs() <= 1e-9 * dpq.max(1.0));
        prop_assert!((n - dpq).abs() <= 1e-12 * dpq.max(1.0));
        prop_assert!(distance(&p, &p).unwrap() < 1e-12);
    }

    #[test]
    fn geodesic_interpolation_splits_distance(seed in any::<u64>(), k in 0usize..11, t in 0.0f64..1.0) {
        let d = kind(k);
        let mut rng = rng(seed);
        let p = random_point(&mut rng, &d);
        let v = random_tangent(&mut rng, &d, &p, round_trip_radius(&d));
        let q = exp_map(&p, &v).unwrap();
        let m = geodesic_interpolate(&p, &q, t).unwrap();
        let total = distance(&p, &q).unwrap();
        prop_assert!((distance(&p, &m).unwrap() - t * total).abs() < 1e-8 * total.max(1.0));
        prop_assert!((distance(&m, &q).unwrap() - (1.0 - t) * total).abs() < 1e-8 * total.max(1.0));
    }

    #[test]
    fn stein_cost_is_symmetric_and_nonnegative(seed in any::<u64>(), m in 2usize..4) {
        let mut rng = rng(seed);
        let a = random_spd(&mut rng, m);
        let b = random_spd(&mut rng, m);
        let ab = sim::stein_cost_matrices(&a, &b).unwrap();
        let ba = sim::stein_cost_matrices(&b, &a).unwrap();
        prop_assert!(ab >= -1e-12);
        prop_assert!((ab - ba).abs() < 1e-10 * ab.max(1.0));
        prop_assert!(sim::stein_cost_matrices(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn null_space_projector_annihilates_jacobian(seed in any::<u64>(), n in 3usize..7) {
        let mut rng = rng(seed);
        let arm = PlanarArm::new((0..n).map(|_| rng.random_range(0.3..1.2)).collect()).unwrap();
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(-2.5..2.5)).collect();
        let j = arm.jacobian(&q);
        let p = sim::null_space_projector(&j);
        // Skip configurations too close to a singularity for a clean check.
        prop_assume!((&j * j.transpose()).determinant() > 1e-3);
        prop_assert!((&j * &p).amax() < 1e-10);
        prop_assert!((&p * &p - &p).amax() < 1e-10);
        prop_assert!((&p - p.transpose()).amax() < 1e-10);
    }

    #[test]
    fn msd_settles_on_a_fixed_target(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let k = random_spd(&mut rng, 2) * 100.0;
        let k = Matrix2::new(k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)]);
        let d = sim::critical_damping(&k, 1.0);
        let target = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let mut s = MsdState::at_rest([0.0, 0.0], 1.0).unwrap();
        for _ in 0..5000 {
            s = sim::msd_step(&s, &k, &d, target, [0.0, 0.0], 1e-3).unwrap().0;
        }
        prop_assert!((s.p[0] - target[0]).hypot(s.p[1] - target[1]) < 1e-3);
    }

    #[test]
    fn goal_switch_step_moves_towards_target(seed in any::<u64>(), k in 0usize..11) {
        let d = kind(k);
        let mut rng = rng(seed);
        let g = random_point(&mut rng, &d);
        let v = random_tangent(&mut rng, &d, &g, round_trip_radius(&d));
        let target = exp_map(&g, &v).unwrap();
        let gains = DmpGains::new(25.0, 1.0).unwrap();
        let next = dmp::goal_switch_step(&g, &target, &gains, 0.01).unwrap();
        let before = distance(&g, &target).unwrap();
        let after = distance(&next, &target).unwrap();
        let factor = 1.0 - gains.alpha_g / gains.tau * 0.01;
        prop_assert!((after - factor * before).abs() < 1e-8 * before.max(1.0));
    }

    #[test]
    fn model_json_round_trip_is_exact(seed in any::<u64>(), k in 0usize..11, n in 2usize..20) {
        let d = kind(k);
        let mut rng = rng(seed);
        let dim = d.tangent_dim();
        let gains = DmpGains::new(rng.random_range(5.0..80.0), rng.random_range(0.2..5.0)).unwrap();
        let model = GaDmpModel {
            descriptor: d.clone(),
            gains,
            basis: BasisSet::new(n, gains.alpha_x).unwrap(),
            weights: DMatrix::from_fn(dim, n, |_, _| gaussian(&mut rng) * 1e3),
            start: random_point(&mut rng, &d),
            goal: random_point(&mut rng, &d),
            scaling: gaussian_vec(&mut rng, dim),
            scaling_mask: (0..dim).map(|_| rng.random_range(0..2) == 1).collect(),
        };
        let text = io::model_to_json(&model).unwrap();
        let back = io::model_from_json(&text).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(io::model_to_json(&back).unwrap(), text);
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = rng(11);
    let h = 1e-6;
    for _ in 0..100 {
        let n = rng.random_range(1..7usize);
        let arm = PlanarArm::new((0..n).map(|_| rng.random_range(0.2..1.5)).collect()).unwrap();
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let j = arm.jacobian(&q);
        for c in 0..n {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[c] += h;
            qm[c] -= h;
            let (fp, fm) = (arm.forward_kinematics(&qp), arm.forward_kinematics(&qm));
            for r in 0..2 {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                assert!((fd - j[(r, c)]).abs() < 1e-7, "n={n} entry ({r},{c}): {fd} vs {}", j[(r, c)]);
            }
        }
    }
}

#[test]
fn projection_repairs_perturbed_points() {
    let mut rng = rng(12);
    for d in all_kinds() {
        for _ in 0..50 {
            let p = random_point(&mut rng, &d);
            let noisy: Vec<f64> = p.data().iter().map(|x| x + 1e-4 * gaussian(&mut rng)).collect();
            let fixed = manifold::project(&noisy, &d).unwrap();
            assert!(manifold::validate(&d, fixed.data(), manifold::VALIDATION_TOL).is_valid(), "{d}");
            assert!(distance(&fixed, &p).unwrap() < 1e-2, "{d}");
        }
    }
}

#[test]
fn identity_points_are_valid() {
    for d in all_kinds() {
        let id = ManifoldPoint::identity(&d);
        assert!(manifold::validate(&d, id.data(), 0.0).is_valid(), "{d}");
    }
}
