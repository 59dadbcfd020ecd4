use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use localregret::baselines::{walksat_offline, winnow2_step, WalkSatParams, WinnowState};
use localregret::dtree::{disagreement, enumerate_trees, DecisionTree};
use localregret::graph::{get_bit, pack_bits};
use localregret::regret::{
    entry, factored_hypercube_distribution, stationary_distribution, Ledger,
};
use localregret::tasks::{make_max3sat, Clause, RandomUtilityTask, Task};
use localregret::verify::{dense_reference, fuzz_case};
use localregret::{
    Hypercube, HypercubeColor, LedgerMode, Length, LevelCap, LocalityGraph, PolicyParams,
};

fn small_trees() -> Vec<DecisionTree> {
    enumerate_trees(&[0, 1, 2], 2).unwrap()
}

proptest! {
    #[test]
    fn bits_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..40)) {
        let v = pack_bits(&bits);
        prop_assert_eq!(v.len(), bits.len().div_ceil(8));
        for (i, b) in bits.iter().enumerate() {
            prop_assert_eq!(get_bit(&v, i), *b);
        }
    }

    #[test]
    fn tree_encoding_roundtrip(i in 0usize..74) {
        let t = &small_trees()[i];
        prop_assert_eq!(&DecisionTree::decode(&t.encode()).unwrap(), t);
    }

    #[test]
    fn tree_distance_is_a_quasi_metric(i in 0usize..74, j in 0usize..74, k in 0usize..74) {
        let trees = small_trees();
        let (a, b, c) = (&trees[i], &trees[j], &trees[k]);
        let d = |x: &DecisionTree, y: &DecisionTree| disagreement(x, y).distance();
        prop_assert_eq!(d(a, a), Length::from_integer(0));
        prop_assert_eq!(d(a, b) == Length::from_integer(0), a == b);
        prop_assert!(d(a, c) <= d(a, b) + d(b, c));
    }

    #[test]
    fn zero_bias_ledger_stays_unbiased(seed in any::<u64>(), steps in 1usize..30) {
        let cube = Hypercube::new(4).unwrap();
        let mut task = RandomUtilityTask::new(ChaCha8Rng::seed_from_u64(seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut edges = Ledger::<f64>::new(LedgerMode::PerEdge, 0.0).unwrap();
        let mut colors = Ledger::<f64>::new(LedgerMode::PerColor, 0.0).unwrap();
        let all = cube.all_vertices();
        for t in 1..=steps {
            Task::<f64>::advance(&mut task, t).unwrap();
            let v = &all[rand::Rng::random_range(&mut rng, 0..all.len())];
            edges.update_swap(&cube, v, |w| task.utility(w)).unwrap();
            colors.update_color(&cube, v, |w| task.utility(w)).unwrap();
        }
        for row in edges.edge_entries().values() {
            for e in row.values() {
                prop_assert_eq!(e.biased, e.unbiased);
            }
        }
        for e in colors.color_entries().values() {
            prop_assert_eq!(e.biased, e.unbiased);
        }
    }

    #[test]
    fn stationary_matches_dense_reference(seed in any::<u64>()) {
        let case = fuzz_case(seed).unwrap();
        let dist = stationary_distribution(&case.ledger, &case.graph, &case.params()).unwrap();
        let total: f64 = dist.probs().values().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        let reference = dense_reference(&case.ledger, &case.graph, case.cap).unwrap();
        for (v, p) in dist.probs() {
            prop_assert!(case.cap.admits(case.graph.level(v).unwrap()));
            assert_abs_diff_eq!(*p, reference.prob(v), epsilon = 1e-8);
        }
        for (v, p) in reference.probs() {
            assert_abs_diff_eq!(*p, dist.prob(v), epsilon = 1e-8);
        }
    }

    #[test]
    fn factored_solver_matches_exact(values in proptest::collection::vec(-1.0f64..2.0, 6), bias in 0.0f64..0.5) {
        let cube = Hypercube::new(3).unwrap();
        let mut ledger = Ledger::new(LedgerMode::PerColor, bias).unwrap();
        for (i, x) in values.iter().enumerate() {
            ledger.set_color(HypercubeColor { var: i / 2, value: i % 2 == 1 }.encode(), entry(*x));
        }
        let marginals = factored_hypercube_distribution(&ledger, 3, LevelCap::Unbounded).unwrap();
        let joint = marginals.joint(&ledger).unwrap();
        let exact = stationary_distribution(&ledger, &cube, &PolicyParams::new(LevelCap::Unbounded, bias)).unwrap();
        for v in cube.all_vertices() {
            assert_abs_diff_eq!(joint.prob(&v), exact.prob(&v), epsilon = 1e-9);
        }
    }

    #[test]
    fn winnow_functional_step_matches(
        weights in proptest::collection::vec(0.1f64..4.0, 5),
        xs in proptest::collection::vec((proptest::collection::vec(any::<bool>(), 5), any::<bool>()), 1..20),
    ) {
        let mut state = WinnowState::with_params(weights, 5.0, 2.0).unwrap();
        let mut functional = state.clone();
        for (x, y) in &xs {
            let p = state.step(x, *y);
            let (q, next) = winnow2_step(&functional, x, *y);
            prop_assert_eq!(p, q);
            functional = next;
            prop_assert_eq!(&functional.weights, &state.weights);
        }
    }

    #[test]
    fn walksat_never_worse_than_its_start(seed in any::<u64>()) {
        let sat = make_max3sat(10, 50, ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let params = WalkSatParams { noise: 0.5, max_flips: 200, restarts: 2 };
        let r = walksat_offline(10, sat.clauses(), params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(r.unsatisfied_fraction <= r.initial_fraction);
        let unsat = sat.clauses().iter().filter(|c: &&Clause| !c.satisfied_by(&r.assignment)).count();
        assert_abs_diff_eq!(r.unsatisfied_fraction, unsat as f64 / 50.0, epsilon = 1e-12);
    }
}
