use std::collections::VecDeque;

use rand::Rng;

use super::ledger::{Ledger, LedgerMode};
use super::measure;
use super::stationary::{compute_policy, Policy, PolicyParams};
use crate::error::{Error, Result};
use crate::graph::{LocalityGraph, VertexId};
use crate::scalar::Scalar;
use crate::tasks::Task;

#[derive(Clone, Debug)]
pub struct RunOptions<S> {
    pub mode: LedgerMode,
    pub params: PolicyParams<S>,
    pub steps: usize,
    /// Rolling-average window for the per-step loss.
    pub window: usize,
    /// Keep an unbiased per-edge ledger alongside a per-color run.
    pub shadow_edges: bool,
    /// Keep an unbiased per-color ledger alongside a per-edge run.
    pub shadow_colors: bool,
    /// Steps after which regret measurements are recorded.
    pub checkpoints: Vec<usize>,
}

impl<S: Scalar> RunOptions<S> {
    pub fn new(mode: LedgerMode, params: PolicyParams<S>, steps: usize) -> Self {
        RunOptions {
            mode,
            params,
            steps,
            window: 100,
            shadow_edges: false,
            shadow_colors: false,
            checkpoints: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct StepRecord {
    pub t: usize,
    #[serde(skip)]
    pub action: VertexId,
    pub utility: f64,
    /// Normalized loss `(span - utility) / span` for this step.
    pub loss: f64,
    /// Mean loss over the trailing window.
    pub rolling: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Checkpoint {
    pub t: usize,
    pub local_color: Option<f64>,
    pub local_swap: Option<f64>,
    /// Only for hypercube graphs, where it has a closed form.
    pub local_external: Option<f64>,
    /// Keys of the primary ledger with nonzero unbiased regret.
    pub nonzero_keys: usize,
}

#[derive(Clone, Debug)]
pub struct RunTrace<S> {
    pub steps: Vec<StepRecord>,
    pub ledger: Ledger<S>,
    pub edge_shadow: Option<Ledger<S>>,
    pub color_shadow: Option<Ledger<S>>,
    pub checkpoints: Vec<Checkpoint>,
    /// Steps at which the played distribution was degenerate.
    pub degenerate_steps: usize,
}

impl<S: Scalar> RunTrace<S> {
    pub fn final_rolling(&self) -> Option<f64> {
        self.steps.last().map(|s| s.rolling)
    }

    /// The per-edge ledger of this run: the primary one, or the shadow.
    pub fn edge_ledger(&self) -> Option<&Ledger<S>> {
        match self.ledger.mode() {
            LedgerMode::PerEdge => Some(&self.ledger),
            LedgerMode::PerColor => self.edge_shadow.as_ref(),
        }
    }

    pub fn color_ledger(&self) -> Option<&Ledger<S>> {
        match self.ledger.mode() {
            LedgerMode::PerColor => Some(&self.ledger),
            LedgerMode::PerEdge => self.color_shadow.as_ref(),
        }
    }
}

/// Hook called with every policy before it is sampled.
pub trait RunObserver<S> {
    fn on_policy(&mut self, t: usize, ledger: &Ledger<S>, policy: &Policy<S>) -> Result<()>;
}

/// Runs regret matching on `task` for `opts.steps` steps.
///
/// Each step computes the policy from the current ledger, samples the action
/// with `rng`, lets the task draw its instance, then evaluates the utility at
/// the action and all its neighbors and updates the ledger.
pub fn run<S, G, T, R>(
    task: &mut T,
    graph: &G,
    opts: &RunOptions<S>,
    rng: &mut R,
    mut observer: Option<&mut dyn RunObserver<S>>,
) -> Result<RunTrace<S>>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
    T: Task<S> + ?Sized,
    R: Rng + ?Sized,
{
    opts.params.validate()?;
    if opts.window == 0 {
        return Err(Error::InvalidParameter(
            "rolling window must be positive".into(),
        ));
    }
    let mut ledger = Ledger::new(opts.mode, opts.params.bias)?;
    let mut edge_shadow = (opts.shadow_edges && opts.mode == LedgerMode::PerColor)
        .then(|| Ledger::new(LedgerMode::PerEdge, S::zero()))
        .transpose()?;
    let mut color_shadow = (opts.shadow_colors && opts.mode == LedgerMode::PerEdge)
        .then(|| Ledger::new(LedgerMode::PerColor, S::zero()))
        .transpose()?;

    let mut steps = Vec::with_capacity(opts.steps);
    let mut checkpoints = Vec::new();
    let mut window: VecDeque<f64> = VecDeque::with_capacity(opts.window);
    let mut degenerate_steps = 0;

    for t in 1..=opts.steps {
        let at = |e: Error| Error::AtStep {
            step: t,
            source: Box::new(e),
        };
        let policy = compute_policy(&ledger, graph, &opts.params, rng).map_err(at)?;
        if let Some(obs) = observer.as_deref_mut() {
            obs.on_policy(t, &ledger, &policy).map_err(at)?;
        }
        if policy.is_degenerate() {
            degenerate_steps += 1;
        }
        let action = policy.sample(rng);

        task.advance(t).map_err(at)?;
        let u = task.utility(&action).map_err(at)?;
        let neighbors = graph
            .out_edges(&action)
            .map_err(at)?
            .into_iter()
            .map(|e| {
                let val = task.utility(&e.target).map_err(|err| Error::Oracle {
                    vertex: e.target.clone(),
                    reason: err.to_string(),
                })?;
                Ok((e, val))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(at)?;
        ledger.apply(&action, u, &neighbors).map_err(at)?;
        if let Some(s) = edge_shadow.as_mut() {
            s.apply(&action, u, &neighbors).map_err(at)?;
        }
        if let Some(s) = color_shadow.as_mut() {
            s.apply(&action, u, &neighbors).map_err(at)?;
        }

        let loss = task.loss(u);
        window.push_back(loss);
        if window.len() > opts.window {
            window.pop_front();
        }
        let rolling = window.iter().sum::<f64>() / window.len() as f64;
        steps.push(StepRecord {
            t,
            action,
            utility: u.to_f64_lossy(),
            loss,
            rolling,
        });

        if opts.checkpoints.contains(&t) {
            let edge = match ledger.mode() {
                LedgerMode::PerEdge => Some(&ledger),
                LedgerMode::PerColor => edge_shadow.as_ref(),
            };
            let color = match ledger.mode() {
                LedgerMode::PerColor => Some(&ledger),
                LedgerMode::PerEdge => color_shadow.as_ref(),
            };
            checkpoints.push(Checkpoint {
                t,
                local_color: color
                    .map(|l| measure::local_color(l))
                    .transpose()
                    .map_err(at)?
                    .map(S::to_f64_lossy),
                local_swap: edge
                    .map(|l| measure::local_swap(l))
                    .transpose()
                    .map_err(at)?
                    .map(S::to_f64_lossy),
                local_external: match (graph.hypercube_dimension(), color) {
                    (Some(n), Some(l)) => Some(
                        measure::local_external_hypercube(l, n)
                            .map_err(at)?
                            .to_f64_lossy(),
                    ),
                    _ => None,
                },
                nonzero_keys: ledger.nonzero_unbiased(),
            });
        }
    }

    Ok(RunTrace {
        steps,
        ledger,
        edge_shadow,
        color_shadow,
        checkpoints,
        degenerate_steps,
    })
}
