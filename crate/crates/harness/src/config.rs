use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Result};
use localregret::tasks::LabelColumn;
use localregret::{LevelCap, SolverMode};
use serde::Serialize;

/// Which online task an experiment runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
pub enum TaskSpec {
    Max3Sat {
        n: usize,
        m: usize,
    },
    Disjunct {
        n: usize,
        inclusion: f64,
    },
    WinnowKiller {
        n: usize,
    },
    Dtree {
        dataset: PathBuf,
        #[serde(serialize_with = "label_column")]
        label: LabelColumn,
        /// Keep this many one-hot features, drawn per trial.
        features: Option<usize>,
        batch: usize,
    },
    Alternating {
        n: usize,
    },
}

fn label_column<S: serde::Serializer>(
    l: &LabelColumn,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&match l {
        LabelColumn::First => "first".to_string(),
        LabelColumn::Last => "last".to_string(),
        LabelColumn::Index(i) => i.to_string(),
    })
}

impl TaskSpec {
    pub fn id(&self) -> &'static str {
        match self {
            TaskSpec::Max3Sat { .. } => "max3sat",
            TaskSpec::Disjunct { .. } => "disjunct",
            TaskSpec::WinnowKiller { .. } => "winnow-killer",
            TaskSpec::Dtree { .. } => "dtree",
            TaskSpec::Alternating { .. } => "alternating",
        }
    }

    /// Hypercube tasks act on assignments; the rest on decision trees.
    pub fn on_hypercube(&self) -> bool {
        matches!(
            self,
            TaskSpec::Max3Sat { .. } | TaskSpec::Disjunct { .. } | TaskSpec::WinnowKiller { .. }
        )
    }

    /// Utility span of one step.
    pub fn delta(&self) -> f64 {
        match self {
            TaskSpec::Dtree { batch, .. } => *batch as f64,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Uniform assignment (hypercube) or uniform constant label (trees) each step.
    Random,
    Walksat,
    Winnow2,
    GreedyTree,
    BestLabel,
    BestStump,
    BestDisjunct,
}

impl Baseline {
    pub const ALL: [Baseline; 7] = [
        Baseline::Random,
        Baseline::Walksat,
        Baseline::Winnow2,
        Baseline::GreedyTree,
        Baseline::BestLabel,
        Baseline::BestStump,
        Baseline::BestDisjunct,
    ];

    fn name(self) -> &'static str {
        match self {
            Baseline::Random => "random",
            Baseline::Walksat => "walksat",
            Baseline::Winnow2 => "winnow2",
            Baseline::GreedyTree => "greedy-tree",
            Baseline::BestLabel => "best-label",
            Baseline::BestStump => "best-stump",
            Baseline::BestDisjunct => "best-disjunct",
        }
    }

    pub fn supports(self, task: &TaskSpec) -> bool {
        match self {
            Baseline::Random => true,
            Baseline::Walksat => matches!(task, TaskSpec::Max3Sat { .. }),
            Baseline::Winnow2 | Baseline::BestDisjunct => {
                matches!(
                    task,
                    TaskSpec::Disjunct { .. } | TaskSpec::WinnowKiller { .. }
                )
            }
            Baseline::GreedyTree | Baseline::BestLabel | Baseline::BestStump => {
                !task.on_hypercube()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Per-edge regret matching.
    LocalSwap,
    /// Per-color regret matching.
    LocalExternal,
    Baseline(Baseline),
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::LocalSwap => f.write_str("local-swap"),
            Algorithm::LocalExternal => f.write_str("local-external"),
            Algorithm::Baseline(b) => f.write_str(b.name()),
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "local-swap" => Ok(Algorithm::LocalSwap),
            "local-external" => Ok(Algorithm::LocalExternal),
            other => Baseline::ALL
                .into_iter()
                .find(|b| b.name() == other)
                .map(Algorithm::Baseline)
                .ok_or_else(|| {
                    let names: Vec<&str> = Baseline::ALL.iter().map(|b| b.name()).collect();
                    format!(
                        "unknown algorithm `{other}` (local-swap, local-external, {})",
                        names.join(", ")
                    )
                }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasSpec {
    /// `Δ/(L+1)` for a bounded level cap, 0 otherwise.
    Auto,
    Value(f64),
}

impl FromStr for BiasSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(BiasSpec::Auto);
        }
        match s.parse::<f64>() {
            Ok(b) if b >= 0.0 && b.is_finite() => Ok(BiasSpec::Value(b)),
            _ => Err(format!(
                "bias must be `auto` or a finite number >= 0, got `{s}`"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Full,
    Desk,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub task: TaskSpec,
    pub algo: Algorithm,
    #[serde(serialize_with = "display")]
    pub level_cap: LevelCap,
    pub bias: BiasSpec,
    /// `None` picks factored for per-color hypercube runs with no level cap
    /// and the exact solver otherwise.
    pub solver: Option<SolverMode>,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    pub window: usize,
    pub preset: Preset,
    /// Check the stationarity conditions on every policy.
    pub paranoid: bool,
}

fn display<T: fmt::Display, S: serde::Serializer>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl ExperimentConfig {
    /// Defaults for `task` and `algo`: no level cap and no bias on hypercube
    /// tasks; on tree tasks a cap of 3 for local swap and 100 for local external.
    pub fn new(task: TaskSpec, algo: Algorithm) -> Self {
        let level_cap = match (task.on_hypercube(), algo) {
            (true, _) => LevelCap::Unbounded,
            (false, Algorithm::LocalSwap) => LevelCap::Bounded(3),
            (false, _) => LevelCap::Bounded(100),
        };
        let (steps, trials) = match task {
            TaskSpec::Max3Sat { .. } => (1000, 200),
            TaskSpec::Disjunct { .. } | TaskSpec::WinnowKiller { .. } => (1000, 50),
            TaskSpec::Dtree { .. } => (1000, 50),
            TaskSpec::Alternating { .. } => (500, 50),
        };
        ExperimentConfig {
            task,
            algo,
            level_cap,
            bias: BiasSpec::Auto,
            solver: None,
            steps,
            trials,
            seed: 0,
            window: 100,
            preset: Preset::Full,
            paranoid: false,
        }
    }

    /// Cuts tree runs to 10 trials of 300 steps over at most 30 features.
    pub fn desk(mut self) -> Self {
        self.preset = Preset::Desk;
        if let TaskSpec::Dtree { features, .. } = &mut self.task {
            self.steps = 300;
            self.trials = 10;
            features.get_or_insert(30);
        }
        self
    }

    pub fn bias_value(&self) -> f64 {
        match (self.bias, self.level_cap) {
            (BiasSpec::Value(b), _) => b,
            (BiasSpec::Auto, LevelCap::Bounded(l)) => self.task.delta() / (l as f64 + 1.0),
            (BiasSpec::Auto, LevelCap::Unbounded) => 0.0,
        }
    }

    pub fn solver_mode(&self) -> SolverMode {
        self.solver.unwrap_or(
            if self.algo == Algorithm::LocalExternal
                && self.task.on_hypercube()
                && self.level_cap == LevelCap::Unbounded
            {
                SolverMode::Factored
            } else {
                SolverMode::ExactCesaro
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.steps == 0 {
            bail!("trials and steps must be at least 1");
        }
        if self.window == 0 || self.window > self.steps {
            bail!(
                "window must be in 1..=steps ({}), got {}",
                self.steps,
                self.window
            );
        }
        if self.level_cap == LevelCap::Bounded(0) {
            bail!("level cap must be positive");
        }
        match self.task {
            TaskSpec::Max3Sat { n, m } if n < 3 || m == 0 => {
                bail!("max3sat needs n >= 3 and m >= 1")
            }
            TaskSpec::Disjunct { n, inclusion } if n == 0 || !(0.0..=1.0).contains(&inclusion) => {
                bail!("disjunct needs n >= 1 and inclusion in [0, 1]")
            }
            TaskSpec::WinnowKiller { n } | TaskSpec::Alternating { n } if n == 0 => {
                bail!("n must be at least 1")
            }
            TaskSpec::Dtree { batch: 0, .. } => bail!("batch must be at least 1"),
            TaskSpec::Dtree {
                features: Some(0), ..
            } => bail!("feature subsample must be at least 1"),
            _ => {}
        }
        if let Algorithm::Baseline(b) = self.algo {
            if !b.supports(&self.task) {
                bail!(
                    "baseline {} does not apply to task {}",
                    self.algo,
                    self.task.id()
                );
            }
        }
        if self.solver_mode() == SolverMode::Factored
            && (!self.task.on_hypercube()
                || self.algo != Algorithm::LocalExternal
                || self.level_cap != LevelCap::Unbounded)
        {
            bail!("the factored solver needs local-external on a hypercube task with --L inf");
        }
        if self.paranoid && self.solver_mode() == SolverMode::ChainWalk {
            bail!("paranoid checks need a solver that returns a distribution");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_bias() {
        let mut c =
            ExperimentConfig::new(TaskSpec::Max3Sat { n: 20, m: 201 }, Algorithm::LocalSwap);
        assert_eq!(c.bias_value(), 0.0);
        c.level_cap = LevelCap::Bounded(9);
        assert!((c.bias_value() - 0.1).abs() < 1e-15);
        let t = TaskSpec::Dtree {
            dataset: "x".into(),
            label: LabelColumn::First,
            features: None,
            batch: 5,
        };
        let c = ExperimentConfig::new(t, Algorithm::LocalSwap);
        assert_eq!(c.level_cap, LevelCap::Bounded(3));
        assert_eq!(c.bias_value(), 1.25);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [
            "local-swap",
            "local-external",
            "walksat",
            "best-stump",
            "greedy-tree",
        ] {
            assert_eq!(a.parse::<Algorithm>().unwrap().to_string(), a);
        }
        assert!("c45".parse::<Algorithm>().is_err());
    }

    #[test]
    fn invalid_combinations() {
        let ok = ExperimentConfig::new(
            TaskSpec::Max3Sat { n: 20, m: 201 },
            Algorithm::LocalExternal,
        );
        assert!(ok.validate().is_ok());
        assert_eq!(ok.solver_mode(), SolverMode::Factored);
        let mut bad = ok.clone();
        bad.window = 2000;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.algo = Algorithm::Baseline(Baseline::Winnow2);
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.level_cap = LevelCap::Bounded(3);
        bad.solver = Some(SolverMode::Factored);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn desk_preset_only_shrinks_tree_runs() {
        let t = TaskSpec::Dtree {
            dataset: "x".into(),
            label: LabelColumn::Last,
            features: None,
            batch: 5,
        };
        let c = ExperimentConfig::new(t, Algorithm::LocalExternal).desk();
        assert_eq!((c.steps, c.trials, c.preset), (300, 10, Preset::Desk));
        assert!(matches!(
            c.task,
            TaskSpec::Dtree {
                features: Some(30),
                ..
            }
        ));
        let c = ExperimentConfig::new(TaskSpec::WinnowKiller { n: 20 }, Algorithm::LocalExternal)
            .desk();
        assert_eq!((c.steps, c.trials), (1000, 50));
    }
}
