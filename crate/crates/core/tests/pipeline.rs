use std::io::Write;

use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use localregret::dtree::DecisionTreeGraph;
use localregret::regret::{local_external_exhaustive, local_external_hypercube, run, RunOptions};
use localregret::tasks::{
    load_uci_categorical, make_dataset_task, make_max3sat, LabelColumn, LoadOptions,
};
use localregret::{Hypercube, LedgerMode, LevelCap, PolicyParams};

#[test]
fn hypercube_run_agrees_with_brute_force_regret() {
    let n = 6;
    let mut task = make_max3sat(n, 30, ChaCha8Rng::seed_from_u64(3)).unwrap();
    let cube = Hypercube::new(n).unwrap();
    let mut opts = RunOptions::new(
        LedgerMode::PerColor,
        PolicyParams::new(LevelCap::Unbounded, 0.0),
        200,
    );
    opts.shadow_edges = true;
    opts.checkpoints = vec![100, 200];
    let trace = run(
        &mut task,
        &cube,
        &opts,
        &mut ChaCha8Rng::seed_from_u64(4),
        None,
    )
    .unwrap();

    assert_eq!(trace.steps.len(), 200);
    assert!(trace.steps.iter().all(|s| (0.0..=1.0).contains(&s.rolling)));
    assert_eq!(
        trace.checkpoints.iter().map(|c| c.t).collect::<Vec<_>>(),
        vec![100, 200]
    );

    let closed = local_external_hypercube(&trace.ledger, n).unwrap();
    let (brute, _) =
        local_external_exhaustive(trace.edge_ledger().unwrap(), &cube, 1 << n).unwrap();
    assert_abs_diff_eq!(closed, brute, epsilon = 1e-9);
    assert_abs_diff_eq!(
        trace.checkpoints[1].local_external.unwrap(),
        closed,
        epsilon = 1e-12
    );
}

#[test]
fn dataset_file_to_tree_learner() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let a = if rand::Rng::random_bool(&mut rng, 0.5) {
            "x"
        } else {
            "y"
        };
        let b = ["p", "q", "r"][rand::Rng::random_range(&mut rng, 0..3)];
        let class = if a == "x" { "yes" } else { "no" };
        writeln!(file, "{a},{b},{class}").unwrap();
    }
    file.flush().unwrap();

    let data = load_uci_categorical(file.path(), &LoadOptions::new(LabelColumn::Last)).unwrap();
    assert_eq!(data.n_features(), 5);
    assert_eq!(data.instances.len(), 200);
    assert_eq!(data.class_counts.values().sum::<usize>(), 200);

    let batch = 5;
    let mut task = make_dataset_task(data.instances, batch, ChaCha8Rng::seed_from_u64(12)).unwrap();
    let graph = DecisionTreeGraph::new(5)
        .unwrap()
        .with_utility_span(batch as f64);
    let cap = 3;
    let params = PolicyParams::new(LevelCap::Bounded(cap), batch as f64 / (cap + 1) as f64);
    let mut opts = RunOptions::new(LedgerMode::PerColor, params, 150);
    opts.window = 50;
    let trace = run(
        &mut task,
        &graph,
        &opts,
        &mut ChaCha8Rng::seed_from_u64(13),
        None,
    )
    .unwrap();

    // One stump separates the classes exactly.
    assert!(
        trace.final_rolling().unwrap() < 0.1,
        "rolling error {}",
        trace.final_rolling().unwrap()
    );
}
