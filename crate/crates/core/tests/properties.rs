mod common;

use blockgraver::blockip::{solve_small_ip, IpOutcome};
use blockgraver::cones::{intersect_many, GeneratorSet};
use blockgraver::format::{parse_instance, serialize_instance, Instance};
use blockgraver::generate::{random_matrix, random_tree, random_two_stage_with, rng, TreeShape, TwoStageShape};
use blockgraver::graver::{complete_graver_basis, decompose_into_graver};
use blockgraver::lowerbound::{analytic_witness, big_residual, gen_encoded, gen_harmonic, Family};
use blockgraver::multistage::{solve_multistage, tower_bound, TreeInstance};
use blockgraver::steinitz::{prefix_radius, steinitz_reorder};
use blockgraver::subrep::{find_common_submultisets, VectorMultiset};
use blockgraver::twostage::{solve, SolveStatus, SolverConfig};
use blockgraver::types::is_conformal;
use blockgraver::{Error, IntMatrix, IntVector, TwoStageInstance};
use num_bigint::BigUint;
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn small_two_stage(seed: u64, max_n: usize, max_width: i64) -> TwoStageInstance {
    let mut rng = rng(seed);
    let shape = TwoStageShape {
        n: rng.random_range(1..=max_n),
        r: rng.random_range(1..=2),
        s: rng.random_range(1..=2),
        t: rng.random_range(1..=2),
        delta: rng.random_range(1..=2),
        max_width,
        max_cost: 4,
    };
    random_two_stage_with(&mut rng, &shape).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assembled_matrix_has_block_shape(seed in any::<u64>()) {
        let inst = small_two_stage(seed, 4, 3);
        let m = inst.assemble_matrix().unwrap();
        prop_assert_eq!((m.rows(), m.cols()), (inst.n * inst.r, inst.s + inst.n * inst.t));
        for i in 0..inst.n {
            for k in 0..inst.r {
                let row = i * inst.r + k;
                for j in 0..inst.s {
                    prop_assert_eq!(m.get(row, j), inst.a_blocks[i].get(k, j));
                }
                for other in 0..inst.n {
                    for j in 0..inst.t {
                        let want = if other == i { inst.b_blocks[i].get(k, j) } else { 0 };
                        prop_assert_eq!(m.get(row, inst.s + other * inst.t + j), want);
                    }
                }
            }
        }
    }

    #[test]
    fn residual_is_matrix_product_minus_rhs(seed in any::<u64>(), x in prop::collection::vec(-6i64..=6, 16)) {
        let inst = small_two_stage(seed, 4, 3);
        let x = &x[..inst.num_vars().min(16)];
        prop_assume!(x.len() == inst.num_vars());
        let m = inst.assemble_matrix().unwrap();
        let want: Vec<i64> = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j) * x[j]).sum::<i64>() - inst.rhs[i])
            .collect();
        prop_assert_eq!(inst.residual(x).unwrap().into_inner(), want);
    }

    #[test]
    fn large_products_are_exact_or_signal_overflow(
        row in prop::collection::vec(-1_000_000i64..=1_000_000, 1..1000),
        scale in 0u32..50,
        seed in any::<u64>(),
    ) {
        let mut rng = rng(seed);
        let limit = 1i64 << scale.min(40);
        let x: Vec<i64> = (0..row.len()).map(|_| rng.random_range(-limit..=limit)).collect();
        let m = IntMatrix::new(1, row.len(), row.clone()).unwrap();
        let exact: i128 = row.iter().zip(&x).map(|(&a, &b)| a as i128 * b as i128).sum();
        match m.mul_vec(&x) {
            Ok(v) => prop_assert_eq!(v[0] as i128, exact),
            Err(Error::Overflow(_)) => prop_assert!(i64::try_from(exact).is_err()),
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn steinitz_output_is_a_bounded_permutation(seed in any::<u64>(), d in 1usize..=4, delta in 1i64..=5, free in 0usize..=20) {
        let mut rng = rng(seed);
        let family = zero_sum_family(&mut rng, d, delta, free);
        let perm = steinitz_reorder(&family, delta).unwrap();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..family.len()).collect::<Vec<_>>());
        prop_assert!(prefix_radius(&family, &perm).unwrap() <= d as i64 * delta);
    }

    #[test]
    fn graver_decomposition_is_conformal_and_exact(seed in any::<u64>(), picks in prop::collection::vec((0usize..64, 1i64..=3), 1..4)) {
        let mut rng = rng(seed);
        let m = rng.random_range(1..=2);
        let cols = rng.random_range(2..=4);
        let matrix = random_matrix(&mut rng, m, cols, 2);
        let basis = complete_graver_basis(&matrix).unwrap();
        let elements = basis.elements();
        prop_assume!(!elements.is_empty());
        // A kernel vector built from one orthant's elements.
        let anchor = &elements[picks[0].0 % elements.len()];
        let mut y = vec![0i64; cols];
        for &(i, k) in &picks {
            let g = &elements[i % elements.len()];
            if is_conformal(g, anchor) {
                for (a, b) in y.iter_mut().zip(g.iter()) {
                    *a += k * b;
                }
            }
        }
        let dec = decompose_into_graver(&matrix, &y, &basis).unwrap();
        prop_assert_eq!(dec.recompose(cols).unwrap().into_inner(), y.clone());
        for (g, k) in &dec.terms {
            prop_assert!(*k > 0);
            prop_assert!(conformal_le(g, &y), "{} is not conformal to {:?}", g, y);
        }
    }

    #[test]
    fn cone_generators_are_sound_and_indecomposable(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let d = rng.random_range(1..=2usize);
        let delta = rng.random_range(1..=3i64);
        let l = rng.random_range(2..=3usize);
        let sets: Vec<GeneratorSet> = (0..l)
            .map(|_| {
                let gens = (0..rng.random_range(1..=3))
                    .map(|_| IntVector::new((0..d).map(|_| rng.random_range(0..=delta)).collect()))
                    .filter(|v| !v.is_zero())
                    .collect::<Vec<_>>();
                let gens = if gens.is_empty() { vec![IntVector::new(vec![1; d])] } else { gens };
                GeneratorSet::new(d, gens).unwrap()
            })
            .collect();
        let result = intersect_many(&sets, delta).unwrap();
        prop_assert_eq!(result.witnesses.len(), result.set.len());
        let extent = result.set.generators().iter().flat_map(|g| g.iter().copied()).max().unwrap_or(0) as usize;
        let members = cone_bitmap(result.set.generators(), d, extent);
        let side = extent + 1;
        let index = |p: &[usize]| p.iter().fold(0, |acc, &x| acc * side + x);
        for (g, ws) in result.set.generators().iter().zip(&result.witnesses) {
            for (set, w) in sets.iter().zip(ws) {
                prop_assert_eq!(set.combine(w).unwrap(), g.clone());
            }
            let g: Vec<usize> = g.iter().map(|&x| x as usize).collect();
            for_each_point(&vec![0; d], &g.iter().map(|&x| x as i64).collect::<Vec<_>>(), |h| {
                let h: Vec<usize> = h.iter().map(|&x| x as usize).collect();
                let rest: Vec<usize> = g.iter().zip(&h).map(|(a, b)| a - b).collect();
                let split = h.iter().any(|&x| x > 0) && rest.iter().any(|&x| x > 0);
                assert!(!(split && members[index(&h)] && members[index(&rest)]), "{g:?} splits as {h:?} + {rest:?}");
            });
        }
    }

    #[test]
    fn common_submultisets_are_valid(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let d = rng.random_range(1..=3usize);
        let delta = rng.random_range(1..=3i64);
        let first: Vec<Vec<i64>> = (0..rng.random_range(1..=10)).map(|_| (0..d).map(|_| rng.random_range(0..=delta)).collect()).collect();
        let total: Vec<i64> = (0..d).map(|k| first.iter().map(|v| v[k]).sum()).collect();
        let mut sets = vec![VectorMultiset::from_vectors(d, first.into_iter().map(IntVector::new)).unwrap()];
        for _ in 1..rng.random_range(1..=4) {
            let split = split_total(&mut rng, &total, delta, 15);
            sets.push(VectorMultiset::from_vectors(d, split.into_iter().map(IntVector::new)).unwrap());
        }
        let found = find_common_submultisets(&sets, delta).unwrap();
        for (sub, t) in found.subsets.iter().zip(&sets) {
            prop_assert!(!sub.is_empty() && sub.is_submultiset_of(t));
            prop_assert_eq!(sub.sum().unwrap(), found.common_sum.clone());
        }
    }

    #[test]
    fn small_ip_matches_enumeration(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let rows = rng.random_range(1..=3);
        let cols = rng.random_range(1..=5);
        let m = random_matrix(&mut rng, rows, cols, 3);
        let lower: Vec<i64> = (0..cols).map(|_| rng.random_range(-3..=3)).collect();
        let upper: Vec<i64> = lower.iter().map(|&l| l + rng.random_range(0..=6)).collect();
        let c: Vec<i64> = (0..cols).map(|_| rng.random_range(-5..=5)).collect();
        // Half the right-hand sides come from a box point, so both outcomes occur.
        let rhs: Vec<i64> = if rng.random_bool(0.5) {
            let x: Vec<i64> = lower.iter().zip(&upper).map(|(&l, &u)| rng.random_range(l..=u)).collect();
            m.mul_vec(&x).unwrap()
        } else {
            (0..rows).map(|_| rng.random_range(-6..=6)).collect()
        };
        let got = solve_small_ip(&m, &rhs, &lower, &upper, &c).unwrap();
        let want = brute_max(&m, &rhs, &lower, &upper, &c);
        prop_assert_eq!(got.value(), want);
        if let IpOutcome::Optimal { solution, value } = &got {
            prop_assert_eq!(m.mul_vec(solution).unwrap(), rhs.clone());
            prop_assert!(solution.iter().zip(&lower).zip(&upper).all(|((x, l), u)| l <= x && x <= u));
            prop_assert_eq!(solution.dot(&IntVector::new(c.clone())).unwrap(), *value);
        }
        prop_assert_eq!(solve_small_ip(&m, &rhs, &lower, &upper, &c).unwrap(), got);
    }

    #[test]
    fn solver_is_optimal_monotone_and_deterministic(seed in any::<u64>()) {
        let inst = small_two_stage(seed, 3, 3);
        let report = solve(&inst, &SolverConfig::default()).unwrap();
        prop_assert_eq!(report.status, SolveStatus::Optimal);
        prop_assert_eq!(report.objective_value, brute_two_stage(&inst));
        let trail = replay_trail(&report, |x| inst.is_feasible(x).unwrap(), &inst.objective);
        prop_assert!(trail.is_ok(), "{:?}", trail);
        let again = solve(&inst, &SolverConfig { parallel_width: 1, ..SolverConfig::default() }).unwrap();
        prop_assert_eq!(again, report);
    }

    #[test]
    fn two_stage_round_trips_through_trees(seed in any::<u64>()) {
        let inst = small_two_stage(seed, 4, 3);
        let tree = TreeInstance::from_two_stage(&inst).unwrap();
        prop_assert!(tree.validate().is_empty());
        prop_assert_eq!(tree.assemble_matrix().unwrap(), inst.assemble_matrix().unwrap());
        prop_assert_eq!(tree.to_two_stage().unwrap(), inst.clone());
        let a = solve_multistage(&tree, &SolverConfig::default()).unwrap();
        let b = solve(&inst, &SolverConfig::default()).unwrap();
        prop_assert_eq!(a.objective_value, b.objective_value);
    }

    #[test]
    fn tower_bound_is_monotone(s in 1u64..=2, r in 1u64..=2, delta in 1u64..=2) {
        let base = tower_bound(&[s], r, delta).unwrap();
        prop_assert!(tower_bound(&[s], r + 1, delta).map_or(true, |t| t > base));
        prop_assert!(tower_bound(&[s], r, delta + 1).map_or(true, |t| t > base));
        let wider = tower_bound(&[s + 1], r, delta);
        // With Δr = 1 every level collapses to 2 whatever its width.
        if delta * r >= 2 {
            prop_assert!(wider.map_or(true, |t| t > base));
        } else {
            prop_assert_eq!(wider.unwrap(), base);
        }
        prop_assert!(tower_bound(&[], r, delta).unwrap() < tower_bound(&[s], r, delta).unwrap());
    }

    #[test]
    fn instances_round_trip_through_text(seed in any::<u64>(), tree in any::<bool>()) {
        let inst = if tree {
            let mut rng = rng(seed);
            let shape = TreeShape { branching: vec![rng.random_range(1..=3), rng.random_range(1..=2)], ..TreeShape::default() };
            Instance::Tree(random_tree(seed, &shape).unwrap())
        } else {
            Instance::TwoStage(small_two_stage(seed, 4, 5))
        };
        let text = serialize_instance(&inst);
        prop_assert_eq!(parse_instance(&text).unwrap(), inst);
    }
}

#[test]
fn analytic_witnesses_lie_in_the_kernel() {
    for delta in 2..=12 {
        let m = gen_harmonic(delta).unwrap();
        let w = analytic_witness(Family::Harmonic, delta, 1).unwrap();
        assert!(big_residual(&m, &w).unwrap().iter().all(Zero::is_zero));
    }
    for delta in 2..=3 {
        for s in 1..=2 {
            let m = gen_encoded(delta, s).unwrap();
            let w = analytic_witness(Family::Encoded, delta, s).unwrap();
            assert!(big_residual(&m, &w).unwrap().iter().all(Zero::is_zero));
            assert!(m.entries().iter().all(|&x| (-1..=delta as i64).contains(&x)));
            let expected = lcm_range(2, delta.pow(s as u32 + 1) - 1);
            assert_eq!(w[0], BigUint::from(expected).into());
        }
    }
}

#[test]
fn no_harmonic_kernel_vector_below_the_lcm() {
    for delta in 2..=7u64 {
        let m = gen_harmonic(delta).unwrap();
        let lcm = lcm_range(2, delta) as i64;
        assert_eq!(min_first_coordinate_search(&m, lcm - 1, 1), None, "delta = {delta}");
        // A zero first coordinate forces the whole vector to zero.
        assert!(kernel_up_to(&m, 50).iter().all(|v| v[0] != 0));
    }
}
