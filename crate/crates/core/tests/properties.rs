mod common;

use argmaxlab::estimators::{simulate_break_data, v_t_objective, BreakDesign, VProfile};
use argmaxlab::mc_harness::ks_samples;
use argmaxlab::process_lab::{
    argmax_over, polyhedral_argmax, sample_limit_argmax, sample_polyhedral_limit, ArgmaxConstraint,
    GaussianSpec, PathSample, QuadraticLimit,
};
use argmaxlab::set_kernel::{hausdorff, linearized_boundary_set, GridSet, Offset, PolyhedralSet};
use argmaxlab::Execution;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn sample(max: usize) -> impl Strategy<Value = Vec<f64>> {
    // a small value set so that ties between samples are common
    prop::collection::vec((-20i32..20).prop_map(|v| v as f64 / 4.0), 1..max)
}

fn dyadic_path() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..120, -200i64..200).prop_flat_map(|(len, start)| {
        let grid: Vec<f64> = (0..len).map(|j| (start + j as i64) as f64 / 32.0).collect();
        (
            Just(grid),
            prop::collection::vec((-40i64..40).prop_map(|v| v as f64 / 8.0), len),
        )
    })
}

fn full_argmax(grid: Vec<f64>, values: Vec<f64>) -> (f64, f64) {
    let path = PathSample::new(grid, values, 0, "p").unwrap();
    let r = argmax_over(&path, &ArgmaxConstraint::Full).unwrap();
    (r.s, r.value)
}

proptest! {
    #[test]
    fn ks_matches_brute_force(a in sample(60), b in sample(60)) {
        let ks = ks_samples(&a, &b).unwrap();
        prop_assert!((ks - common::ks_brute(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn ks_is_a_metric(a in sample(40), b in sample(40), c in sample(40)) {
        let ab = ks_samples(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, ks_samples(&b, &a).unwrap());
        prop_assert_eq!(ks_samples(&a, &a).unwrap(), 0.0);
        let via = ks_samples(&a, &c).unwrap() + ks_samples(&c, &b).unwrap();
        prop_assert!(ab <= via + 1e-12);
    }

    #[test]
    fn sup_difference_bound((grid, f) in dyadic_path(), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let g: Vec<f64> = f.iter().map(|v| v + rand::Rng::random_range(&mut rng, -16i64..16) as f64 / 8.0).collect();
        let gap = f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (_, sf) = full_argmax(grid.clone(), f);
        let (_, sg) = full_argmax(grid, g);
        prop_assert!((sf - sg).abs() <= gap);
    }

    #[test]
    fn argmax_invariance((grid, f) in dyadic_path(), k in -8i32..8, shift in -500i64..500, moved in -64i64..64) {
        let (s0, v0) = full_argmax(grid.clone(), f.clone());
        let c = 2f64.powi(k);
        let (s1, v1) = full_argmax(grid.clone(), f.iter().map(|v| c * v + shift as f64).collect());
        prop_assert_eq!(s1, s0);
        prop_assert_eq!(v1, c * v0 + shift as f64);
        let t = moved as f64 / 16.0;
        let (s2, _) = full_argmax(grid.iter().map(|s| s + t).collect(), f);
        prop_assert_eq!(s2, s0 + t);
    }

    #[test]
    fn upto_constraint_respected((grid, f) in dyadic_path(), a in -8.0f64..8.0) {
        let path = PathSample::new(grid.clone(), f.clone(), 0, "p").unwrap();
        match argmax_over(&path, &ArgmaxConstraint::UpTo(a)) {
            Ok(r) => {
                prop_assert!(r.s <= a);
                let best = grid.iter().zip(&f).filter(|(s, _)| **s <= a).map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(r.value, best);
            }
            Err(_) => prop_assert!(grid.iter().all(|s| *s > a)),
        }
    }

    #[test]
    fn linearized_set_membership(
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 1..5),
        offsets in prop::collection::vec(prop::option::weighted(0.8, -2.0f64..0.0), 5),
        points in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..20),
    ) {
        let b: Vec<Offset> = rows
            .iter()
            .zip(&offsets)
            .map(|(_, o)| o.map_or(Offset::NegInf, Offset::Finite))
            .collect();
        let p = linearized_boundary_set(&b, &rows, 2).unwrap();
        for h in &points {
            let direct = rows.iter().zip(&b).all(|(g, off)| match off.finite() {
                Some(bj) => bj + g[0] * h[0] + g[1] * h[1] <= 1e-9,
                None => true,
            });
            let margin = rows.iter().zip(&b).filter_map(|(g, off)| off.finite().map(|bj| (bj + g[0] * h[0] + g[1] * h[1]).abs())).fold(f64::INFINITY, f64::min);
            if margin > 1e-6 {
                prop_assert_eq!(p.contains(h), direct);
            }
        }
    }

    #[test]
    fn positive_drift_rejected(row in prop::collection::vec(-2.0f64..2.0, 2), b in 1e-9f64..5.0) {
        prop_assert!(linearized_boundary_set(&[Offset::Finite(b)], &[row], 2).is_err());
    }

    #[test]
    fn hausdorff_is_symmetric(
        a in prop::collection::vec(-50i32..50, 1..30),
        b in prop::collection::vec(-50i32..50, 1..30),
    ) {
        let to_set = |v: &[i32]| GridSet::from_values(v.iter().map(|&x| x as f64 / 10.0).collect()).unwrap();
        let (sa, sb) = (to_set(&a), to_set(&b));
        let d = hausdorff(&sa, &sb).unwrap();
        prop_assert_eq!(d, hausdorff(&sb, &sa).unwrap());
        prop_assert_eq!(hausdorff(&sa, &sa).unwrap(), 0.0);
        let oracle = a.iter().map(|x| b.iter().map(|y| (x - y).abs()).min().unwrap())
            .chain(b.iter().map(|y| a.iter().map(|x| (x - y).abs()).min().unwrap()))
            .max().unwrap() as f64 / 10.0;
        prop_assert!((d - oracle).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qp_matches_enumeration(seed in any::<u64>()) {
        let inst = common::random_qp(&mut common::rng(seed));
        let d = inst.v.nrows();
        let m = inst.g.nrows();
        let rows = (0..m).map(|j| inst.g.row(j).iter().copied().collect()).collect();
        let p = PolyhedralSet::new(d, rows, (0..m).map(|j| Offset::Finite(inst.b[j])).collect()).unwrap();
        let q = QuadraticLimit::new(inst.v.clone(), DMatrix::identity(d, d), DVector::zeros(d)).unwrap();
        let sol = polyhedral_argmax(&q, &inst.z, &p).unwrap();
        let exact = common::enumerate_qp(&inst.v, &inst.z, &inst.g, &inst.b);
        for (a, b) in sol.h.iter().zip(&exact) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        prop_assert!(sol.kkt.worst() <= 1e-8);
        let grid = common::brute_force_qp(&inst.v, &inst.z, &inst.g, &inst.b);
        let h: Vec<f64> = sol.h.iter().copied().collect();
        prop_assert!(common::qp_value(&inst.v, &inst.z, &grid) <= common::qp_value(&inst.v, &inst.z, &h) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn parallel_equals_sequential(seed in any::<u64>()) {
        let spec = GaussianSpec::identity(DVector::from_vec(vec![1.0, 1.0])).unwrap();
        let run = |exec| sample_limit_argmax(&spec, &ArgmaxConstraint::UpTo(-1.0), 50, 10.0, 0.05, seed, exec).unwrap();
        prop_assert_eq!(run(Execution::Parallel), run(Execution::Sequential));

        let q = QuadraticLimit::isotropic(2, 1.0).unwrap();
        let p = PolyhedralSet::new(2, vec![vec![1.0, 1.0]], vec![Offset::Finite(-0.5)]).unwrap();
        let draw = |exec| sample_polyhedral_limit(&q, &p, 100, seed, exec).unwrap();
        prop_assert_eq!(draw(Execution::Parallel), draw(Execution::Sequential));
    }

    #[test]
    fn profiled_objective_matches_direct_regression(seed in any::<u64>()) {
        let design = BreakDesign { t: 120, ..BreakDesign::default() };
        let data = simulate_break_data(&design, seed).unwrap();
        let profile = VProfile::new(&data).unwrap();
        for k in [10usize, 37, 60, 61, 99, 110] {
            let direct = v_t_objective(k, &data).unwrap();
            let fast = profile.value(k).unwrap();
            prop_assert!((direct - fast).abs() <= 1e-8 * direct.abs().max(1.0), "k = {}: {} vs {}", k, direct, fast);
        }
    }
}
