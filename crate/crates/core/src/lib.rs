//! No-regret learning over large, locally structured action spaces.
//!
//! Actions are vertices of a [`LocalityGraph`]: a hypercube of assignments,
//! a space of decision trees under single edits, or a product of such
//! graphs. The learner keeps a ledger of how much it would have gained by
//! following each edge (or each edge color) and plays the stationary
//! distribution of the Markov chain those gains define, restricted to
//! vertices within a level cap of the root.

pub mod baselines;
pub mod dtree;
pub mod error;
pub mod graph;
pub mod regret;
pub mod scalar;
pub mod tasks;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{
    ColorId, CompleteGraph, Edge, ExplicitGraph, GraphMeta, Hypercube, HypercubeColor, Length,
    LevelCap, LocalityGraph, ProductGraph, VertexId,
};
pub use regret::{LedgerMode, PolicyParams, SolverMode};
pub use scalar::Scalar;
pub use tasks::Task;

/// Ledger over `f64` gains.
pub type RegretLedger = regret::Ledger<f64>;
/// Mixed strategy over vertices with `f64` probabilities.
pub type ActionDistribution = regret::Distribution<f64>;
/// Policy parameters at `f64`.
pub type Params = regret::PolicyParams<f64>;
/// Per-step trace of an online run at `f64`.
pub type Trace = regret::RunTrace<f64>;
