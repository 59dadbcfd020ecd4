use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use localregret::regret::{theorem_bound, BoundKind};
use localregret::tasks::LabelColumn;
use localregret::verify::{run_corpus, CorpusSize};
use localregret::{LevelCap, SolverMode};

use crate::config::{Algorithm, BiasSpec, ExperimentConfig, TaskSpec};
use crate::experiment::run_experiment;
use crate::output::write_all;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "localregret",
    version,
    about = "Local regret experiments and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Online Max-3SAT on random clause sets.
    RunMax3sat {
        #[command(flatten)]
        task: SatArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Online learning of a random hidden disjunction.
    RunDisjunct {
        #[command(flatten)]
        task: DisjunctArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// The 21-instance pool that defeats Winnow2.
    RunWinnowKiller {
        #[command(flatten)]
        task: DimArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Decision trees on a categorical dataset.
    RunDtree {
        #[command(flatten)]
        task: DtreeArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Identical instances with alternating labels.
    RunAlternating {
        /// Number of (always false) features.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// A baseline on any task; `--algo` names the baseline.
    Baseline {
        #[arg(long, value_enum)]
        task: TaskId,
        #[command(flatten)]
        sat: SatArgs,
        /// Dimension; 20 by default, 2 for the alternating task.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        inclusion: Option<f64>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long = "label-col", default_value = "first", value_parser = parse_label)]
        label_col: LabelColumn,
        #[arg(long, default_value_t = 5)]
        batch: usize,
        #[arg(long)]
        features: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Runs every verification campaign.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// A few cases per campaign.
        #[arg(long)]
        quick: bool,
        /// One JSON object per line instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Prints the per-step regret bounds for a hypercube of dimension `n`.
    Bounds {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long = "L", default_value = "inf")]
        level_cap: LevelCap,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TaskId {
    Max3sat,
    Disjunct,
    WinnowKiller,
    Dtree,
    Alternating,
}

#[derive(Args, Debug)]
struct SatArgs {
    /// Number of variables.
    #[arg(long = "vars", default_value_t = 20)]
    vars: usize,
    /// Number of clauses.
    #[arg(long = "clauses", default_value_t = 201)]
    clauses: usize,
}

#[derive(Args, Debug)]
struct DimArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
}

#[derive(Args, Debug)]
struct DisjunctArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Inclusion probability of each variable; defaults to 4/n.
    #[arg(long)]
    inclusion: Option<f64>,
}

#[derive(Args, Debug)]
struct DtreeArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// `first`, `last` or a 0-based column index.
    #[arg(long = "label-col", default_value = "first", value_parser = parse_label)]
    label_col: LabelColumn,
    /// Instances per step.
    #[arg(long, default_value_t = 5)]
    batch: usize,
    /// Keep a random subset of this many one-hot features per trial.
    #[arg(long)]
    features: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value = "local-external")]
    algo: Algorithm,
    /// Level cap, an integer or `inf`.
    #[arg(long = "L")]
    level_cap: Option<LevelCap>,
    /// `auto` or a number.
    #[arg(long, default_value = "auto")]
    bias: BiasSpec,
    #[arg(long)]
    solver: Option<SolverMode>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rolling window; defaults to 100, or the run length if shorter.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Smaller tree runs: 10 trials of 300 steps over at most 30 features.
    #[arg(long)]
    desk: bool,
    /// Check the stationarity conditions of every policy played.
    #[arg(long)]
    paranoid: bool,
}

fn parse_label(s: &str) -> std::result::Result<LabelColumn, String> {
    match s {
        "first" => Ok(LabelColumn::First),
        "last" => Ok(LabelColumn::Last),
        i => i
            .parse()
            .map(LabelColumn::Index)
            .map_err(|_| format!("label column must be first, last or an index: `{i}`")),
    }
}

fn disjunct(n: usize, inclusion: Option<f64>) -> TaskSpec {
    TaskSpec::Disjunct {
        n,
        inclusion: inclusion.unwrap_or((4.0 / n.max(1) as f64).min(1.0)),
    }
}

fn config(task: TaskSpec, run: &RunArgs) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(task, run.algo);
    if run.desk {
        c = c.desk();
    }
    if let Some(l) = run.level_cap {
        c.level_cap = l;
    }
    c.bias = run.bias;
    c.solver = run.solver;
    c.steps = run.steps.unwrap_or(c.steps);
    c.trials = run.trials.unwrap_or(c.trials);
    c.seed = run.seed;
    c.window = run.window.unwrap_or(c.window.min(c.steps));
    c.paranoid = run.paranoid;
    c
}

enum Failure {
    Usage(anyhow::Error),
    Check,
    Runtime(anyhow::Error),
}

fn run_config(cfg: ExperimentConfig, out: Option<&PathBuf>) -> std::result::Result<(), Failure> {
    cfg.validate().map_err(Failure::Usage)?;
    let result = run_experiment(&cfg).map_err(Failure::Runtime)?;
    println!(
        "{} {} on {}: final rolling metric {:.4} over {} trials",
        if cfg.preset == crate::config::Preset::Desk {
            "[desk]"
        } else {
            "[full]"
        },
        cfg.algo,
        cfg.task.id(),
        result.final_rolling(),
        result.trials.len()
    );
    for name in result.trials[0].scalars.keys() {
        if let Some((m, ci)) = result.scalar(name) {
            println!(
                "  {name}: {m:.4}{}",
                ci.map(|c| format!(" ± {c:.4}")).unwrap_or_default()
            );
        }
    }
    if let Some(out) = out {
        let paths = write_all(&result, out).map_err(Failure::Runtime)?;
        println!(
            "  wrote {}, {}, {}",
            paths.trials.display(),
            paths.aggregate.display(),
            paths.metadata.display()
        );
    }
    if let Some(rep) = result.paranoid_report() {
        println!("  {rep}");
        if !rep.passed {
            return Err(Failure::Check);
        }
    }
    Ok(())
}

fn bounds(n: usize, cap: LevelCap, steps: usize, delta: f64) -> Result<()> {
    // Vertices at level k of the n-cube: C(n, k), each with n out-edges.
    let mut at_level = 1f64;
    let mut low_vertices = 0f64;
    for k in 0..=n {
        if !cap.admits(k) {
            break;
        }
        low_vertices += at_level;
        at_level = at_level * (n - k) as f64 / (k + 1) as f64;
    }
    let edges = (low_vertices * n as f64) as usize;
    // Turn-on colors leave the root; turn-off colors need level >= 1.
    let colors = if cap.admits(1) { 2 * n } else { n };
    let swap = theorem_bound(BoundKind::Swap, delta, n as u64, cap, edges, steps)?;
    let color = theorem_bound(BoundKind::Color, delta, n as u64, cap, colors, steps)?;
    println!("hypercube n={n} L={cap} T={steps} delta={delta}");
    println!("  |E_L| = {edges}, |C_L| = {colors}, D = {n}");
    println!("  local swap regret / T    <= {swap:.6}");
    println!("  local colored regret / T <= {color:.6}");
    println!("  local external regret / T <= {:.6}", color / n as f64);
    Ok(())
}

fn dispatch(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::RunMax3sat { task, run } => run_config(
            config(
                TaskSpec::Max3Sat {
                    n: task.vars,
                    m: task.clauses,
                },
                &run,
            ),
            run.out.as_ref(),
        ),
        Command::RunDisjunct { task, run } => run_config(
            config(disjunct(task.n, task.inclusion), &run),
            run.out.as_ref(),
        ),
        Command::RunWinnowKiller { task, run } => run_config(
            config(TaskSpec::WinnowKiller { n: task.n }, &run),
            run.out.as_ref(),
        ),
        Command::RunAlternating { n, run } => {
            run_config(config(TaskSpec::Alternating { n }, &run), run.out.as_ref())
        }
        Command::RunDtree { task, run } => {
            let spec = TaskSpec::Dtree {
                dataset: task.dataset,
                label: task.label_col,
                features: task.features,
                batch: task.batch,
            };
            run_config(config(spec, &run), run.out.as_ref())
        }
        Command::Baseline {
            task,
            sat,
            n,
            inclusion,
            dataset,
            label_col,
            batch,
            features,
            run,
        } => {
            if !matches!(run.algo, Algorithm::Baseline(_)) {
                return Err(Failure::Usage(anyhow::anyhow!(
                    "`baseline` needs a baseline --algo, got {}",
                    run.algo
                )));
            }
            let n = n.unwrap_or(if matches!(task, TaskId::Alternating) {
                2
            } else {
                20
            });
            let spec = match task {
                TaskId::Max3sat => TaskSpec::Max3Sat {
                    n: sat.vars,
                    m: sat.clauses,
                },
                TaskId::Disjunct => disjunct(n, inclusion),
                TaskId::WinnowKiller => TaskSpec::WinnowKiller { n },
                TaskId::Alternating => TaskSpec::Alternating { n },
                TaskId::Dtree => {
                    let dataset = dataset.ok_or_else(|| {
                        Failure::Usage(anyhow::anyhow!("--task dtree needs --dataset"))
                    })?;
                    TaskSpec::Dtree {
                        dataset,
                        label: label_col,
                        features,
                        batch,
                    }
                }
            };
            run_config(config(spec, &run), run.out.as_ref())
        }
        Command::Verify { seed, quick, json } => {
            let size = if quick {
                CorpusSize::Quick
            } else {
                CorpusSize::Full
            };
            let reports = run_corpus(seed, size).map_err(|e| Failure::Runtime(e.into()))?;
            for r in &reports {
                if json {
                    println!("{}", r.to_json_line());
                } else {
                    println!("{r}");
                }
            }
            if reports.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::Bounds {
            n,
            level_cap,
            steps,
            delta,
        } => bounds(n, level_cap, steps, delta).map_err(Failure::Usage),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code: 0 on success, 1 when a check fails or a run errors, 2 on bad usage.
pub fn cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(parsed) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
        Err(Failure::Check) => EXIT_CHECK_FAILED,
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            EXIT_CHECK_FAILED
        }
    }
}
