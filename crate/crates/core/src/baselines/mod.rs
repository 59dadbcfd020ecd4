//! Comparison learners and hindsight baselines. Each `*_curve` function
//! plays `steps` rounds of a task and returns the per-step normalized loss.

mod greedy;
mod hindsight;
mod walksat;
mod winnow;

pub use greedy::greedy_retrained_tree;
pub use hindsight::{best_in_hindsight, BestInHindsight, HindsightClass, Hypothesis};
pub use walksat::{walksat_offline, WalkSatParams, WalkSatResult};
pub use winnow::{winnow2_step, WinnowState};

use rand::Rng;

use crate::dtree::DecisionTree;
use crate::error::{Error, Result};
use crate::graph::hypercube::pack_bits;
use crate::graph::VertexId;
use crate::tasks::{ActionKind, ClassificationTask, Instance, Task};

/// Plays `choose(t)` at each step `t = 1..=steps`.
pub fn action_curve<T, F>(task: &mut T, steps: usize, mut choose: F) -> Result<Vec<f64>>
where
    T: Task<f64> + ?Sized,
    F: FnMut(usize) -> VertexId,
{
    let mut out = Vec::with_capacity(steps);
    for t in 1..=steps {
        let a = choose(t);
        task.advance(t)?;
        let u = task.utility(&a)?;
        out.push(task.loss(u));
    }
    Ok(out)
}

/// A fresh uniform hypercube vertex over `n` bits each step.
pub fn random_assignment_baseline<T, R>(
    task: &mut T,
    n: usize,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    T: Task<f64> + ?Sized,
    R: Rng + ?Sized,
{
    action_curve(task, steps, |_| {
        pack_bits(&(0..n).map(|_| rng.random()).collect::<Vec<bool>>())
    })
}

/// A fresh uniform constant tree each step.
pub fn random_label_baseline<T, R>(task: &mut T, steps: usize, rng: &mut R) -> Result<Vec<f64>>
where
    T: Task<f64> + ?Sized,
    R: Rng + ?Sized,
{
    action_curve(task, steps, |_| DecisionTree::Leaf(rng.random()).encode())
}

fn mistakes(pred: impl Fn(&Instance) -> bool, batch: &[Instance]) -> f64 {
    batch.iter().filter(|x| pred(x) != x.label).count() as f64 / batch.len() as f64
}

/// Online Winnow2 on a disjunct task. Each batch is predicted with the
/// weights held at the start of the step.
pub fn winnow_curve(task: &mut ClassificationTask, steps: usize) -> Result<Vec<f64>> {
    if task.kind() != ActionKind::Disjunct {
        return Err(Error::Unsupported("winnow runs on disjunct tasks".into()));
    }
    let mut w = WinnowState::new(task.dimension());
    let mut out = Vec::with_capacity(steps);
    for t in 1..=steps {
        Task::<f64>::advance(task, t)?;
        out.push(mistakes(|x| w.predict(&x.features), task.current()));
        for x in task.current() {
            w.step(&x.features, x.label);
        }
    }
    Ok(out)
}

/// Retrains [`greedy_retrained_tree`] on every example seen so far before each step.
pub fn greedy_tree_curve(task: &mut ClassificationTask, steps: usize) -> Result<Vec<f64>> {
    let mut history: Vec<Instance> = Vec::new();
    let mut out = Vec::with_capacity(steps);
    for t in 1..=steps {
        let tree = greedy_retrained_tree(&history);
        Task::<f64>::advance(task, t)?;
        let batch = task.current();
        let mut wrong = 0;
        for x in batch {
            wrong += (tree.evaluate(&x.features)? != x.label) as usize;
        }
        out.push(wrong as f64 / batch.len() as f64);
        history.extend_from_slice(batch);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{make_alternating_task, make_max3sat, make_random_disjunct_task};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alternating_defeats_retraining() {
        let mut task = make_alternating_task(2, ChaCha8Rng::seed_from_u64(0)).unwrap();
        let curve = greedy_tree_curve(&mut task, 500).unwrap();
        assert!(curve.iter().all(|&l| l == 1.0));
    }

    #[test]
    fn winnow_learns_random_disjunct() {
        let mut task = make_random_disjunct_task(20, 0.2, ChaCha8Rng::seed_from_u64(4)).unwrap();
        let curve = winnow_curve(&mut task, 1000).unwrap();
        assert!(curve.iter().sum::<f64>() < 60.0);
        assert!(curve.windows(100).any(|w| w.iter().all(|&l| l == 0.0)));
    }

    #[test]
    fn random_assignment_near_one_eighth() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut task = make_max3sat(20, 201, ChaCha8Rng::seed_from_u64(2)).unwrap();
        let curve = random_assignment_baseline(&mut task, 20, 20_000, &mut rng).unwrap();
        let mean = curve.iter().sum::<f64>() / curve.len() as f64;
        assert!((mean - 0.125).abs() < 0.01, "{mean}");
    }

    #[test]
    fn random_label_is_deterministic_under_seed() {
        let go = || {
            let mut task = make_alternating_task(2, ChaCha8Rng::seed_from_u64(0)).unwrap();
            random_label_baseline(&mut task, 200, &mut ChaCha8Rng::seed_from_u64(7)).unwrap()
        };
        let a = go();
        assert_eq!(a, go());
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!((mean - 0.5).abs() < 0.1);
    }
}
