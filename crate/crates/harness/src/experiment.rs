use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use localregret::baselines::{
    best_in_hindsight, greedy_tree_curve, random_assignment_baseline, random_label_baseline,
    walksat_offline, winnow_curve, HindsightClass, Hypothesis, WalkSatParams,
};
use localregret::dtree::DecisionTreeGraph;
use localregret::graph::Hypercube;
use localregret::regret::{run, Checkpoint, RunOptions};
use localregret::tasks::{
    load_uci_categorical, make_alternating_task, make_dataset_task, make_max3sat,
    make_random_disjunct_task, make_winnow_killer, subsample_features, ClassificationTask,
    Instance, LoadOptions, LoadedDataset, Max3Sat,
};
use localregret::verify::{CheckReport, Requirement2Observer};
use localregret::{LedgerMode, LocalityGraph, Params, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::{aggregate, mean_ci, ResultTable};
use crate::config::{Algorithm, Baseline, ExperimentConfig, TaskSpec};
use crate::seed::seed_plan;

/// Tolerance of the paranoid stationarity checks.
pub const PARANOID_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub utility: Vec<f64>,
    pub loss: Vec<f64>,
    pub rolling: Vec<f64>,
    pub checkpoints: Vec<Checkpoint>,
    pub degenerate_steps: usize,
    /// Named per-trial numbers that are not per-step series, such as the
    /// offline WalkSAT result or a hindsight error.
    pub scalars: BTreeMap<String, f64>,
    pub paranoid: Option<CheckReport>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub rolling: ResultTable,
    /// Dataset facts for tree tasks.
    pub dataset: Option<DatasetInfo>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DatasetInfo {
    pub instances: usize,
    pub features: usize,
    pub negative_class: String,
    pub class_counts: BTreeMap<String, usize>,
}

impl ExperimentResult {
    /// Mean over trials of the last rolling value.
    pub fn final_rolling(&self) -> f64 {
        self.rolling.last_mean()
    }

    /// Mean and half-width over trials of a named scalar.
    pub fn scalar(&self, name: &str) -> Option<(f64, Option<f64>)> {
        let xs: Option<Vec<f64>> = self
            .trials
            .iter()
            .map(|t| t.scalars.get(name).copied())
            .collect();
        mean_ci(&xs?).ok()
    }

    /// Per checkpoint step, the mean over trials of `f`, when every trial has it.
    pub fn checkpoint_means(&self, f: impl Fn(&Checkpoint) -> Option<f64>) -> Vec<(usize, f64)> {
        let Some(first) = self.trials.first() else {
            return Vec::new();
        };
        first
            .checkpoints
            .iter()
            .enumerate()
            .filter_map(|(i, c)| {
                let xs: Option<Vec<f64>> = self
                    .trials
                    .iter()
                    .map(|t| t.checkpoints.get(i).and_then(&f))
                    .collect();
                xs.map(|xs| (c.t, xs.iter().sum::<f64>() / xs.len() as f64))
            })
            .collect()
    }

    /// Folded paranoid reports of all trials.
    pub fn paranoid_report(&self) -> Option<CheckReport> {
        let mut out: Option<CheckReport> = None;
        for r in self.trials.iter().filter_map(|t| t.paranoid.clone()) {
            out.get_or_insert_with(|| CheckReport::campaign(&r.check))
                .absorb(r);
        }
        out
    }
}

/// Trailing mean of `losses` over `window` steps.
pub fn rolling_mean(losses: &[f64], window: usize) -> Vec<f64> {
    let mut q = VecDeque::with_capacity(window);
    let mut sum = 0.0;
    losses
        .iter()
        .map(|&x| {
            q.push_back(x);
            sum += x;
            if q.len() > window {
                sum -= q.pop_front().expect("nonempty");
            }
            // Recomputing avoids drift from the running sum.
            q.iter().sum::<f64>() / q.len() as f64
        })
        .collect()
}

fn checkpoint_steps(steps: usize) -> Vec<usize> {
    let every = (steps / 10).max(1);
    let mut c: Vec<usize> = (1..=steps / every).map(|i| i * every).collect();
    if c.last() != Some(&steps) {
        c.push(steps);
    }
    c
}

fn load_dataset(task: &TaskSpec) -> Result<Option<Arc<LoadedDataset>>> {
    let TaskSpec::Dtree { dataset, label, .. } = task else {
        return Ok(None);
    };
    let data = load_uci_categorical(dataset, &LoadOptions::new(label.clone()))
        .with_context(|| format!("loading dataset {}", dataset.display()))?;
    Ok(Some(Arc::new(data)))
}

enum BuiltTask {
    Sat(Max3Sat),
    Class(ClassificationTask),
}

fn build_task(
    cfg: &ExperimentConfig,
    data: Option<&LoadedDataset>,
    mut rng: ChaCha8Rng,
) -> Result<BuiltTask> {
    Ok(match &cfg.task {
        TaskSpec::Max3Sat { n, m } => BuiltTask::Sat(make_max3sat(*n, *m, rng)?),
        TaskSpec::Disjunct { n, inclusion } => {
            BuiltTask::Class(make_random_disjunct_task(*n, *inclusion, rng)?)
        }
        TaskSpec::WinnowKiller { n } => BuiltTask::Class(make_winnow_killer(*n, rng)?),
        TaskSpec::Alternating { n } => BuiltTask::Class(make_alternating_task(*n, rng)?),
        TaskSpec::Dtree {
            features, batch, ..
        } => {
            let data = data.ok_or_else(|| anyhow!("dataset not loaded"))?;
            let instances = match features {
                Some(k) if *k < data.n_features() => {
                    subsample_features(data, *k, &mut rng)?.instances
                }
                _ => data.instances.clone(),
            };
            BuiltTask::Class(make_dataset_task(instances, *batch, rng)?)
        }
    })
}

fn dimension(task: &BuiltTask) -> usize {
    match task {
        BuiltTask::Sat(s) => s.n(),
        BuiltTask::Class(c) => c.dimension(),
    }
}

/// Plays the task for `steps` steps with no learner, returning every batch.
fn record_stream(task: &mut ClassificationTask, steps: usize) -> Result<Vec<Vec<Instance>>> {
    (1..=steps)
        .map(|t| {
            Task::<f64>::advance(task, t)?;
            Ok(task.current().to_vec())
        })
        .collect()
}

fn hypothesis_curve(h: &Hypothesis, stream: &[Vec<Instance>]) -> Result<Vec<f64>> {
    stream
        .iter()
        .map(|batch| {
            let mut wrong = 0;
            for x in batch {
                let p = match h {
                    Hypothesis::Tree(t) => t.evaluate(&x.features)?,
                    Hypothesis::Disjunct(d) => d.iter().zip(&x.features).any(|(a, b)| *a && *b),
                };
                wrong += (p != x.label) as usize;
            }
            Ok(wrong as f64 / batch.len() as f64)
        })
        .collect()
}

fn run_learner(
    cfg: &ExperimentConfig,
    task: &mut dyn Task<f64>,
    graph: &dyn LocalityGraph,
    rng: &mut ChaCha8Rng,
    out: &mut TrialResult,
) -> Result<()> {
    let params = Params::new(cfg.level_cap, cfg.bias_value()).with_solver(cfg.solver_mode());
    let mode = if cfg.algo == Algorithm::LocalSwap {
        LedgerMode::PerEdge
    } else {
        LedgerMode::PerColor
    };
    let mut opts = RunOptions::new(mode, params, cfg.steps);
    opts.window = cfg.window;
    opts.shadow_colors = mode == LedgerMode::PerEdge;
    opts.shadow_edges = mode == LedgerMode::PerColor;
    opts.checkpoints = checkpoint_steps(cfg.steps);
    let mut observer = cfg
        .paranoid
        .then(|| Requirement2Observer::new(graph, cfg.level_cap, PARANOID_TOL));
    let obs = observer
        .as_mut()
        .map(|o| o as &mut dyn localregret::regret::RunObserver<f64>);
    let trace = run(task, graph, &opts, rng, obs)?;
    out.utility = trace.steps.iter().map(|s| s.utility).collect();
    out.loss = trace.steps.iter().map(|s| s.loss).collect();
    out.checkpoints = trace.checkpoints;
    out.degenerate_steps = trace.degenerate_steps;
    out.paranoid = observer.map(|o| o.report);
    Ok(())
}

fn run_baseline(
    b: Baseline,
    cfg: &ExperimentConfig,
    task: BuiltTask,
    rng: &mut ChaCha8Rng,
    out: &mut TrialResult,
) -> Result<()> {
    let steps = cfg.steps;
    out.loss = match (b, task) {
        (Baseline::Random, BuiltTask::Sat(mut s)) => {
            let n = s.n();
            random_assignment_baseline(&mut s, n, steps, rng)?
        }
        (Baseline::Random, BuiltTask::Class(mut c)) if cfg.task.on_hypercube() => {
            let n = c.dimension();
            random_assignment_baseline(&mut c, n, steps, rng)?
        }
        (Baseline::Random, BuiltTask::Class(mut c)) => random_label_baseline(&mut c, steps, rng)?,
        (Baseline::Walksat, BuiltTask::Sat(mut s)) => {
            let found = walksat_offline(s.n(), s.clauses(), WalkSatParams::default(), rng)?;
            out.scalars
                .insert("walksat_unsatisfied".into(), found.unsatisfied_fraction);
            out.scalars
                .insert("initial_unsatisfied".into(), found.initial_fraction);
            let v = localregret::graph::pack_bits(&found.assignment);
            localregret::baselines::action_curve(&mut s, steps, |_| v.clone())?
        }
        (Baseline::Winnow2, BuiltTask::Class(mut c)) => winnow_curve(&mut c, steps)?,
        (Baseline::GreedyTree, BuiltTask::Class(mut c)) => greedy_tree_curve(&mut c, steps)?,
        (
            Baseline::BestLabel | Baseline::BestStump | Baseline::BestDisjunct,
            BuiltTask::Class(mut c),
        ) => {
            let class = match b {
                Baseline::BestLabel => HindsightClass::Labels,
                Baseline::BestStump => HindsightClass::Stumps,
                _ => HindsightClass::Disjuncts,
            };
            let stream = record_stream(&mut c, steps)?;
            let flat: Vec<Instance> = stream.iter().flatten().cloned().collect();
            let best = best_in_hindsight(class, &flat)?;
            out.scalars
                .insert("hindsight_error".into(), best.error_rate());
            hypothesis_curve(&best.hypothesis, &stream)?
        }
        _ => anyhow::bail!("baseline {b:?} does not apply to task {}", cfg.task.id()),
    };
    let delta = cfg.task.delta();
    out.utility = out.loss.iter().map(|l| delta * (1.0 - l)).collect();
    Ok(())
}

/// Runs trial `trial` of `cfg`. The result depends only on `cfg`, the
/// dataset and `trial`.
pub fn run_trial(
    cfg: &ExperimentConfig,
    data: Option<&LoadedDataset>,
    trial: usize,
) -> Result<TrialResult> {
    let mut trial_rng = seed_plan(cfg.seed, trial as u64);
    // Task randomness comes first so every algorithm sees the same task in a given trial.
    let task_rng = ChaCha8Rng::seed_from_u64(trial_rng.random());
    let mut algo_rng = ChaCha8Rng::seed_from_u64(trial_rng.random());
    let task = build_task(cfg, data, task_rng)?;
    let mut out = TrialResult {
        trial,
        utility: Vec::new(),
        loss: Vec::new(),
        rolling: Vec::new(),
        checkpoints: Vec::new(),
        degenerate_steps: 0,
        scalars: BTreeMap::new(),
        paranoid: None,
    };
    match cfg.algo {
        Algorithm::Baseline(b) => run_baseline(b, cfg, task, &mut algo_rng, &mut out)?,
        _ => {
            let n = dimension(&task);
            let graph: Box<dyn LocalityGraph> = if cfg.task.on_hypercube() {
                Box::new(Hypercube::new(n)?)
            } else {
                Box::new(DecisionTreeGraph::new(n)?.with_utility_span(cfg.task.delta()))
            };
            match task {
                BuiltTask::Sat(mut s) => {
                    run_learner(cfg, &mut s, graph.as_ref(), &mut algo_rng, &mut out)?
                }
                BuiltTask::Class(mut c) => {
                    run_learner(cfg, &mut c, graph.as_ref(), &mut algo_rng, &mut out)?
                }
            }
        }
    }
    out.rolling = rolling_mean(&out.loss, cfg.window);
    Ok(out)
}

/// Runs every trial of `cfg` in the rayon pool and aggregates the rolling metric.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let data = load_dataset(&cfg.task)?;
    let mut trials: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, data.as_deref(), i).with_context(|| format!("trial {i}")))
        .collect::<Result<_>>()?;
    trials.sort_by_key(|t| t.trial);
    let rolling = aggregate(&trials.iter().map(|t| t.rolling.clone()).collect::<Vec<_>>())?;
    let dataset = data.map(|d| DatasetInfo {
        instances: d.instances.len(),
        features: d.n_features(),
        negative_class: d.negative_class.clone(),
        class_counts: d.class_counts.clone(),
    });
    Ok(ExperimentResult {
        config: cfg.clone(),
        trials,
        rolling,
        dataset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(algo: Algorithm) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(TaskSpec::Max3Sat { n: 8, m: 30 }, algo);
        c.steps = 60;
        c.trials = 3;
        c.window = 20;
        c.seed = 4;
        c
    }

    #[test]
    fn rolling_window() {
        assert_eq!(
            rolling_mean(&[1.0, 0.0, 0.0, 1.0], 2),
            vec![1.0, 0.5, 0.0, 0.5]
        );
    }

    #[test]
    fn checkpoints_end_at_horizon() {
        assert_eq!(checkpoint_steps(1000).first(), Some(&100));
        assert_eq!(checkpoint_steps(1000).last(), Some(&1000));
        assert_eq!(checkpoint_steps(7), vec![1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(checkpoint_steps(25).last(), Some(&25));
    }

    #[test]
    fn trials_are_independent_of_order() {
        let cfg = small(Algorithm::LocalSwap);
        let all = run_experiment(&cfg).unwrap();
        let alone = run_trial(&cfg, None, 2).unwrap();
        assert_eq!(all.trials[2].utility, alone.utility);
        assert_eq!(all.trials[2].rolling, alone.rolling);
    }

    #[test]
    fn algorithms_share_the_task() {
        // Same trial, same clause stream: the best fixed assignment in
        // hindsight does equally well against both runs' clause sequences.
        let a = run_trial(&small(Algorithm::LocalSwap), None, 0).unwrap();
        let b = run_trial(&small(Algorithm::Baseline(Baseline::Walksat)), None, 0).unwrap();
        assert_eq!(a.utility.len(), b.utility.len());
        assert!(b.scalars["walksat_unsatisfied"] < 0.2);
    }

    #[test]
    fn paranoid_run_is_clean() {
        let mut cfg = small(Algorithm::LocalSwap);
        cfg.paranoid = true;
        let r = run_experiment(&cfg).unwrap();
        let rep = r.paranoid_report().unwrap();
        assert!(rep.passed, "{rep}");
        assert_eq!(rep.cases, 180);
    }

    #[test]
    fn hindsight_labels_on_alternating() {
        let mut cfg = ExperimentConfig::new(
            TaskSpec::Alternating { n: 2 },
            Algorithm::Baseline(Baseline::BestLabel),
        );
        cfg.steps = 100;
        cfg.trials = 1;
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.scalar("hindsight_error").unwrap().0, 0.5);
    }
}
