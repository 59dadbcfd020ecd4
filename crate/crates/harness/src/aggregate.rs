use anyhow::{bail, Result};
use serde::Serialize;

/// Per-step mean across trials, with a 95% normal confidence half-width
/// `1.96 * sd / sqrt(trials)` when there are at least two trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultTable {
    pub trials: usize,
    pub mean: Vec<f64>,
    pub ci_halfwidth: Option<Vec<f64>>,
}

impl ResultTable {
    pub fn last_mean(&self) -> f64 {
        *self.mean.last().expect("at least one step")
    }
}

/// Aggregates equal-length per-trial series. Uses the sample standard deviation.
pub fn aggregate(series: &[Vec<f64>]) -> Result<ResultTable> {
    let Some(first) = series.first() else {
        bail!("no trials to aggregate")
    };
    let len = first.len();
    if len == 0 || series.iter().any(|s| s.len() != len) {
        bail!("trials must be nonempty and of equal length");
    }
    let k = series.len() as f64;
    let mean: Vec<f64> = (0..len)
        .map(|i| series.iter().map(|s| s[i]).sum::<f64>() / k)
        .collect();
    let ci_halfwidth = (series.len() >= 2).then(|| {
        (0..len)
            .map(|i| {
                let var = series.iter().map(|s| (s[i] - mean[i]).powi(2)).sum::<f64>() / (k - 1.0);
                1.96 * var.sqrt() / k.sqrt()
            })
            .collect()
    });
    Ok(ResultTable {
        trials: series.len(),
        mean,
        ci_halfwidth,
    })
}

/// Mean and half-width of a list of scalars, as [`aggregate`] would give for
/// one-step series.
pub fn mean_ci(xs: &[f64]) -> Result<(f64, Option<f64>)> {
    let series: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
    let t = aggregate(&series)?;
    Ok((t.mean[0], t.ci_halfwidth.map(|c| c[0])))
}
