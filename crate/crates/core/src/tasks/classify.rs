use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Instance, Task};
use crate::dtree::DecisionTree;
use crate::error::{Error, Result};
use crate::graph::hypercube::get_bit;
use crate::graph::VertexId;
use crate::scalar::Scalar;

/// How an action encodes a classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    /// Hypercube vertex: bit `i` set means variable `i` is in the disjunction.
    Disjunct,
    /// Encoded [`DecisionTree`].
    Tree,
}

/// The prediction of `action` on features `x`. The empty disjunction predicts false.
pub fn predict(kind: ActionKind, action: &VertexId, x: &[bool]) -> Result<bool> {
    match kind {
        ActionKind::Disjunct => {
            if action.len() != x.len().div_ceil(8) {
                return Err(Error::Decode {
                    vertex: action.clone(),
                    reason: format!("not a disjunct over {} variables", x.len()),
                });
            }
            Ok((0..x.len()).any(|i| x[i] && get_bit(action, i)))
        }
        ActionKind::Tree => DecisionTree::decode(action)?.evaluate(x),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource {
    /// Uniform random features labelled by a fixed disjunction.
    HiddenDisjunct(Vec<bool>),
    /// Uniform draws, with replacement, from a fixed pool.
    Pool(Vec<Instance>),
    /// The all-false feature vector with label `t odd`.
    Alternating,
}

/// Classification task: each step draws `batch` instances, and the utility
/// of a classifier is how many it labels correctly.
#[derive(Clone, Debug)]
pub struct ClassificationTask {
    name: String,
    n: usize,
    kind: ActionKind,
    source: InstanceSource,
    batch: usize,
    rng: ChaCha8Rng,
    current: Vec<Instance>,
}

impl ClassificationTask {
    pub fn new(
        name: &str,
        n: usize,
        kind: ActionKind,
        source: InstanceSource,
        batch: usize,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if n == 0 || batch == 0 {
            return Err(Error::InvalidParameter(
                "classification task needs n >= 1 and batch >= 1".into(),
            ));
        }
        match &source {
            InstanceSource::HiddenDisjunct(d) if d.len() != n => {
                return Err(Error::InvalidParameter(
                    "hidden disjunct length mismatch".into(),
                ));
            }
            InstanceSource::Pool(pool) => {
                if pool.is_empty() {
                    return Err(Error::InvalidParameter("empty instance pool".into()));
                }
                if let Some(bad) = pool.iter().position(|x| x.features.len() != n) {
                    return Err(Error::InvalidParameter(format!(
                        "instance {bad} has the wrong dimension"
                    )));
                }
            }
            _ => {}
        }
        Ok(ClassificationTask {
            name: name.into(),
            n,
            kind,
            source,
            batch,
            rng,
            current: Vec::new(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ActionKind {
        self.kind
    }

    pub fn source(&self) -> &InstanceSource {
        &self.source
    }

    /// Instances drawn for the current step.
    pub fn current(&self) -> &[Instance] {
        &self.current
    }

    /// Number of `instances` that `action` classifies correctly.
    pub fn correct(&self, action: &VertexId, instances: &[Instance]) -> Result<usize> {
        let mut ok = 0;
        match self.kind {
            ActionKind::Tree => {
                let t = DecisionTree::decode(action)?;
                for x in instances {
                    ok += (t.evaluate(&x.features)? == x.label) as usize;
                }
            }
            ActionKind::Disjunct => {
                for x in instances {
                    ok += (predict(self.kind, action, &x.features)? == x.label) as usize;
                }
            }
        }
        Ok(ok)
    }
}

impl<S: Scalar> Task<S> for ClassificationTask {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn utility_span(&self) -> f64 {
        self.batch as f64
    }

    fn advance(&mut self, t: usize) -> Result<()> {
        self.current.clear();
        for _ in 0..self.batch {
            let inst = match &self.source {
                InstanceSource::HiddenDisjunct(d) => {
                    let features: Vec<bool> = (0..self.n).map(|_| self.rng.random()).collect();
                    let label = features.iter().zip(d).any(|(x, inc)| *x && *inc);
                    Instance { features, label }
                }
                InstanceSource::Pool(pool) => pool[self.rng.random_range(0..pool.len())].clone(),
                InstanceSource::Alternating => Instance {
                    features: vec![false; self.n],
                    label: t % 2 == 1,
                },
            };
            self.current.push(inst);
        }
        Ok(())
    }

    fn utility(&self, action: &VertexId) -> Result<S> {
        if self.current.is_empty() {
            return Err(Error::Input("no instance drawn yet".into()));
        }
        Ok(S::of_usize(self.correct(action, &self.current)?))
    }
}

/// Hidden disjunction including each variable with probability `inclusion_prob`.
pub fn make_random_disjunct_task(
    n: usize,
    inclusion_prob: f64,
    mut rng: ChaCha8Rng,
) -> Result<ClassificationTask> {
    if !(0.0..=1.0).contains(&inclusion_prob) {
        return Err(Error::InvalidParameter(format!(
            "inclusion probability {inclusion_prob}"
        )));
    }
    let hidden: Vec<bool> = (0..n).map(|_| rng.random_bool(inclusion_prob)).collect();
    ClassificationTask::new(
        "random-disjunct",
        n,
        ActionKind::Disjunct,
        InstanceSource::HiddenDisjunct(hidden),
        1,
        rng,
    )
}

/// `n` positive unit vectors plus the negative all-true vector.
pub fn winnow_killer_pool(n: usize) -> Vec<Instance> {
    let mut pool: Vec<Instance> = (0..n)
        .map(|i| {
            let mut features = vec![false; n];
            features[i] = true;
            Instance {
                features,
                label: true,
            }
        })
        .collect();
    pool.push(Instance {
        features: vec![true; n],
        label: false,
    });
    pool
}

pub fn make_winnow_killer(n: usize, rng: ChaCha8Rng) -> Result<ClassificationTask> {
    ClassificationTask::new(
        "winnow-killer",
        n,
        ActionKind::Disjunct,
        InstanceSource::Pool(winnow_killer_pool(n)),
        1,
        rng,
    )
}

/// Decision-tree task over a dataset, `batch` instances per step.
pub fn make_dataset_task(
    instances: Vec<Instance>,
    batch: usize,
    rng: ChaCha8Rng,
) -> Result<ClassificationTask> {
    let n = instances
        .first()
        .map(|x| x.features.len())
        .ok_or_else(|| Error::InvalidParameter("empty dataset".into()))?;
    ClassificationTask::new(
        "dataset",
        n,
        ActionKind::Tree,
        InstanceSource::Pool(instances),
        batch,
        rng,
    )
}

/// Identical all-false features whose label alternates, starting true at `t = 1`.
pub fn make_alternating_task(n: usize, rng: ChaCha8Rng) -> Result<ClassificationTask> {
    ClassificationTask::new(
        "alternating",
        n,
        ActionKind::Tree,
        InstanceSource::Alternating,
        1,
        rng,
    )
}
