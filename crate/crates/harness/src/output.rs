use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::experiment::ExperimentResult;

/// Files written for one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputPaths {
    pub trials: PathBuf,
    pub aggregate: PathBuf,
    pub metadata: PathBuf,
}

impl OutputPaths {
    /// `r.csv` gives `r.csv`, `r.aggregate.csv` and `r.meta.json`.
    pub fn from_out(out: &Path) -> Self {
        let stem = out.with_extension("");
        let sibling = |suffix: &str| {
            let mut s = stem.clone().into_os_string();
            s.push(suffix);
            PathBuf::from(s)
        };
        OutputPaths {
            trials: out.to_path_buf(),
            aggregate: sibling(".aggregate.csv"),
            metadata: sibling(".meta.json"),
        }
    }
}

/// `trial,step,utility,rolling_metric`, one row per trial and step.
pub fn write_trials_csv<W: Write>(result: &ExperimentResult, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["trial", "step", "utility", "rolling_metric"])?;
    for t in &result.trials {
        for (i, (u, r)) in t.utility.iter().zip(&t.rolling).enumerate() {
            out.write_record([
                t.trial.to_string(),
                (i + 1).to_string(),
                u.to_string(),
                r.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `step,mean,ci_halfwidth`; the last column only with two or more trials.
pub fn write_aggregate_csv<W: Write>(result: &ExperimentResult, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let table = &result.rolling;
    match &table.ci_halfwidth {
        Some(ci) => {
            out.write_record(["step", "mean", "ci_halfwidth"])?;
            for (i, (m, c)) in table.mean.iter().zip(ci).enumerate() {
                out.write_record([(i + 1).to_string(), m.to_string(), c.to_string()])?;
            }
        }
        None => {
            out.write_record(["step", "mean"])?;
            for (i, m) in table.mean.iter().enumerate() {
                out.write_record([(i + 1).to_string(), m.to_string()])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Series {
    step: usize,
    mean: f64,
}

fn series(points: Vec<(usize, f64)>) -> Vec<Series> {
    points
        .into_iter()
        .map(|(step, mean)| Series { step, mean })
        .collect()
}

/// Everything about a run except the per-step tables: the full config, the
/// crate version and summary statistics. The generation time sits in its
/// own `generated` object so the rest can be compared across reruns.
pub fn metadata(result: &ExperimentResult) -> Value {
    let mut scalars = serde_json::Map::new();
    if let Some(first) = result.trials.first() {
        for name in first.scalars.keys() {
            if let Some((mean, ci)) = result.scalar(name) {
                scalars.insert(name.clone(), json!({ "mean": mean, "ci_halfwidth": ci }));
            }
        }
    }
    let degenerate: f64 = result
        .trials
        .iter()
        .map(|t| t.degenerate_steps as f64)
        .sum::<f64>()
        / result.trials.len().max(1) as f64;
    let generated = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "config": result.config,
        "version": env!("CARGO_PKG_VERSION"),
        "summary": {
            "trials": result.trials.len(),
            "final_rolling_mean": result.final_rolling(),
            "final_rolling_ci_halfwidth": result.rolling.ci_halfwidth.as_ref().and_then(|c| c.last()),
            "mean_degenerate_steps": degenerate,
            "scalars": scalars,
            "local_color": series(result.checkpoint_means(|c| c.local_color)),
            "local_swap": series(result.checkpoint_means(|c| c.local_swap)),
            "local_external": series(result.checkpoint_means(|c| c.local_external)),
            "nonzero_regret_keys": series(result.checkpoint_means(|c| Some(c.nonzero_keys as f64))),
            "paranoid": result.paranoid_report(),
            "dataset": result.dataset,
        },
        "generated": { "unix_seconds": generated },
    })
}

pub fn write_all(result: &ExperimentResult, out: &Path) -> Result<OutputPaths> {
    let paths = OutputPaths::from_out(out);
    let open = |p: &Path| File::create(p).with_context(|| format!("creating {}", p.display()));
    write_trials_csv(result, open(&paths.trials)?)?;
    write_aggregate_csv(result, open(&paths.aggregate)?)?;
    let mut meta = open(&paths.metadata)?;
    serde_json::to_writer_pretty(&mut meta, &metadata(result))?;
    meta.write_all(b"\n")?;
    Ok(paths)
}
