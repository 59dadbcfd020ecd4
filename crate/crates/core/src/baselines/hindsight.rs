use std::collections::BTreeMap;
use std::fmt;

use crate::dtree::{DecisionTree, Var};
use crate::error::{Error, Result};
use crate::tasks::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HindsightClass {
    Labels,
    /// Every single-test tree: feature × leaf pair.
    Stumps,
    /// Every disjunction over at most 24 features, found exhaustively.
    Disjuncts,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    Tree(DecisionTree),
    Disjunct(Vec<bool>),
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Tree(t) => write!(f, "{t}"),
            Hypothesis::Disjunct(d) => {
                let vars: Vec<String> = d
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b)
                    .map(|(i, _)| format!("x{i}"))
                    .collect();
                if vars.is_empty() {
                    write!(f, "false")
                } else {
                    write!(f, "{}", vars.join(" | "))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestInHindsight {
    pub class: HindsightClass,
    pub hypothesis: Hypothesis,
    pub mistakes: usize,
    pub total: usize,
}

impl BestInHindsight {
    pub fn error_rate(&self) -> f64 {
        self.mistakes as f64 / self.total as f64
    }
}

/// The hypothesis in `class` with the fewest mistakes on `history`; ties go
/// to the first in enumeration order.
pub fn best_in_hindsight(class: HindsightClass, history: &[Instance]) -> Result<BestInHindsight> {
    if history.is_empty() {
        return Err(Error::InvalidParameter("empty history".into()));
    }
    let n = history[0].features.len();
    let total = history.len();
    let (hypothesis, mistakes) = match class {
        HindsightClass::Labels => {
            let pos = history.iter().filter(|x| x.label).count();
            let label = pos > total - pos;
            (
                Hypothesis::Tree(DecisionTree::Leaf(label)),
                if label { total - pos } else { pos },
            )
        }
        HindsightClass::Stumps => {
            if n > Var::MAX as usize + 1 {
                return Err(Error::InvalidParameter(format!("{n} features")));
            }
            // Label counts on each side of each feature.
            let mut best = (DecisionTree::Leaf(false), usize::MAX);
            for f in 0..n {
                let mut c = [[0usize; 2]; 2];
                for x in history {
                    c[x.features[f] as usize][x.label as usize] += 1;
                }
                for (lt, lf) in [(false, false), (false, true), (true, false), (true, true)] {
                    let m = c[1][!lt as usize] + c[0][!lf as usize];
                    if m < best.1 {
                        best = (
                            DecisionTree::node(
                                f as Var,
                                DecisionTree::Leaf(lt),
                                DecisionTree::Leaf(lf),
                            ),
                            m,
                        );
                    }
                }
            }
            (Hypothesis::Tree(best.0), best.1)
        }
        HindsightClass::Disjuncts => {
            if n > 24 {
                return Err(Error::InvalidParameter(format!(
                    "exhaustive disjunct search over {n} features"
                )));
            }
            let mut counts: BTreeMap<(u32, bool), usize> = BTreeMap::new();
            for x in history {
                let mask = x
                    .features
                    .iter()
                    .enumerate()
                    .fold(0u32, |m, (i, b)| m | (*b as u32) << i);
                *counts.entry((mask, x.label)).or_default() += 1;
            }
            let counts: Vec<((u32, bool), usize)> = counts.into_iter().collect();
            let mut best = (0u32, usize::MAX);
            for d in 0..(1u32 << n) {
                let m: usize = counts
                    .iter()
                    .filter(|((mask, y), _)| (mask & d != 0) != *y)
                    .map(|(_, c)| c)
                    .sum();
                if m < best.1 {
                    best = (d, m);
                }
            }
            (
                Hypothesis::Disjunct((0..n).map(|i| best.0 >> i & 1 == 1).collect()),
                best.1,
            )
        }
    };
    Ok(BestInHindsight {
        class,
        hypothesis,
        mistakes,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::winnow_killer_pool;

    #[test]
    fn majority_label() {
        let h: Vec<Instance> = (0..10)
            .map(|i| Instance {
                features: vec![false],
                label: i < 6,
            })
            .collect();
        let b = best_in_hindsight(HindsightClass::Labels, &h).unwrap();
        assert_eq!(b.hypothesis, Hypothesis::Tree(DecisionTree::Leaf(true)));
        assert!((b.error_rate() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn winnow_killer_full_disjunct() {
        let b = best_in_hindsight(HindsightClass::Disjuncts, &winnow_killer_pool(20)).unwrap();
        assert_eq!(b.hypothesis, Hypothesis::Disjunct(vec![true; 20]));
        assert_eq!((b.mistakes, b.total), (1, 21));
    }

    #[test]
    fn perfect_stump() {
        let h: Vec<Instance> = (0..16u32)
            .map(|m| {
                let features: Vec<bool> = (0..4).map(|i| m >> i & 1 == 1).collect();
                Instance {
                    label: features[3],
                    features,
                }
            })
            .collect();
        let b = best_in_hindsight(HindsightClass::Stumps, &h).unwrap();
        assert_eq!(b.hypothesis, Hypothesis::Tree("(v3 T F)".parse().unwrap()));
        assert_eq!(b.mistakes, 0);
    }
}
