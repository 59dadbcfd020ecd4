//! Online environments. A task reveals, each step, a utility function that
//! can be evaluated at any action; the learner commits to its action before
//! the task draws the step's instance.

mod classify;
mod dataset;
mod max3sat;
mod random;

pub use classify::{
    make_alternating_task, make_dataset_task, make_random_disjunct_task, make_winnow_killer,
    predict, winnow_killer_pool, ActionKind, ClassificationTask, InstanceSource,
};
pub use dataset::{
    load_uci_categorical, subsample_features, LabelColumn, LoadOptions, LoadedDataset,
    MissingPolicy,
};
pub use max3sat::{make_max3sat, Clause, Literal, Max3Sat};
pub use random::RandomUtilityTask;

use crate::error::Result;
use crate::graph::VertexId;
use crate::scalar::Scalar;

/// One labelled example over boolean features.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    pub features: Vec<bool>,
    pub label: bool,
}

pub trait Task<S: Scalar>: Send {
    fn name(&self) -> String;

    /// `Δ`: utilities lie in `[0, Δ]`.
    fn utility_span(&self) -> f64;

    /// Draws the instance for step `t` (1-based).
    fn advance(&mut self, t: usize) -> Result<()>;

    /// Utility of `action` on the current step's instance.
    fn utility(&self, action: &VertexId) -> Result<S>;

    /// Normalized loss `(Δ - u) / Δ`: the unsatisfied or misclassified fraction.
    fn loss(&self, u: S) -> f64 {
        let d = self.utility_span();
        (d - u.to_f64_lossy()) / d
    }
}

impl<S: Scalar, T: Task<S> + ?Sized> Task<S> for Box<T> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn utility_span(&self) -> f64 {
        (**self).utility_span()
    }
    fn advance(&mut self, t: usize) -> Result<()> {
        (**self).advance(t)
    }
    fn utility(&self, action: &VertexId) -> Result<S> {
        (**self).utility(action)
    }
    fn loss(&self, u: S) -> f64 {
        (**self).loss(u)
    }
}
