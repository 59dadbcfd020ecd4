//! Regret ledgers, the fixed-point policy, regret measures and the online loop.

pub mod bounds;
pub mod ledger;
pub(crate) mod linalg;
pub mod measure;
pub mod run;
pub mod stationary;

pub use bounds::{theorem_bound, BoundKind};
pub use ledger::{entry, Entry, Ledger, LedgerMode, ZERO_EPS};
pub use measure::{
    color_totals, global, local_color, local_color_from_edges, local_external_exhaustive,
    local_external_hypercube, local_external_materialized, local_internal, local_swap,
    GlobalRegret,
};
pub use run::{run, Checkpoint, RunObserver, RunOptions, RunTrace, StepRecord};
pub use stationary::{
    build_active_chain, chain_walk, compute_policy, factored_hypercube_distribution,
    stationary_distribution, ActiveChain, Distribution, Policy, PolicyParams, ProductMarginals,
    SolverMode,
};
