use crate::error::{Error, Result};
use crate::graph::LevelCap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Local swap regret of (Δ/(L+1), L)-regret matching; `count = |E_L|`.
    Swap,
    /// Local colored regret of colored regret matching; `count = |C_L|`.
    Color,
}

/// Per-step expected regret guarantee.
///
/// Swap: `Δ/(L+1) + Δ·sqrt(D·count/T)`. Color: `Δ·D/(L+1) + Δ·sqrt(D·count/T)`.
/// With an unbounded level cap the first term vanishes.
pub fn theorem_bound(
    kind: BoundKind,
    delta: f64,
    degree: u64,
    level_cap: LevelCap,
    count: usize,
    steps: usize,
) -> Result<f64> {
    if steps == 0 {
        return Err(Error::InvalidParameter("bound needs T >= 1".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(
            "utility span must be positive".into(),
        ));
    }
    let d = degree as f64;
    let level_term = match level_cap.bound() {
        Some(l) => delta / (l as f64 + 1.0),
        None => 0.0,
    };
    let level_term = match kind {
        BoundKind::Swap => level_term,
        BoundKind::Color => level_term * d,
    };
    Ok(level_term + delta * (d * count as f64).sqrt() / (steps as f64).sqrt())
}
