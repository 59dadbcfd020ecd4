//! Experiment orchestration for `localregret`: configuration, per-trial
//! seeding, parallel trials, aggregation and CSV/JSON output, plus the
//! command-line front end.

pub mod aggregate;
pub mod cli;
pub mod config;
pub mod experiment;
pub mod output;
pub mod seed;

pub use aggregate::{aggregate, ResultTable};
pub use config::{Algorithm, Baseline, BiasSpec, ExperimentConfig, Preset, TaskSpec};
pub use experiment::{run_experiment, run_trial, ExperimentResult, TrialResult};
pub use seed::seed_plan;
