use std::collections::BTreeSet;

use num_rational::Ratio;

use super::{DecisionTree, Edit, PathValue, Var};
use crate::error::{Error, Result};
use crate::graph::Length;

/// Disagreement of `B` relative to `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Disagreement {
    /// Decision nodes of `B` with no node on the same variable at the same path in `A`.
    pub structural: usize,
    /// Leaves of `B` under an agreeing parent whose label `A` does not hold there.
    pub leaves: usize,
}

impl Disagreement {
    /// `11/10 * structural + leaves`: the edit distance from `A` to `B`.
    pub fn distance(&self) -> Length {
        Ratio::new(11 * self.structural as u64, 10) + Length::from_integer(self.leaves as u64)
    }

    pub fn distance_f64(&self) -> f64 {
        1.1 * self.structural as f64 + self.leaves as f64
    }
}

/// Walks `b` alongside the subtree of `a` at the same path. The root has a
/// virtual parent that always agrees.
pub fn disagreement(a: &DecisionTree, b: &DecisionTree) -> Disagreement {
    fn go(a: Option<&DecisionTree>, b: &DecisionTree, acc: &mut Disagreement) {
        match b {
            DecisionTree::Leaf(l) => {
                if let Some(sub) = a {
                    if *sub != DecisionTree::Leaf(*l) {
                        acc.leaves += 1;
                    }
                }
            }
            DecisionTree::Node { var, t, f } => match a {
                Some(DecisionTree::Node {
                    var: av,
                    t: at,
                    f: af,
                }) if av == var => {
                    go(Some(at), t, acc);
                    go(Some(af), f, acc);
                }
                _ => {
                    acc.structural += 1;
                    go(None, t, acc);
                    go(None, f, acc);
                }
            },
        }
    }
    let mut acc = Disagreement {
        structural: 0,
        leaves: 0,
    };
    go(Some(a), b, &mut acc);
    acc
}

/// Unweighted distance from the constant-false root: one edit per internal
/// node, or one leaf edit for the constant-true tree.
pub fn tree_level(t: &DecisionTree) -> usize {
    let d = disagreement(&DecisionTree::root(), t);
    d.structural + d.leaves
}

/// Whether `edit`, applied to its source, lies on a shortest path to `target`.
///
/// A stump edit at `p` on `v` with labels `(l1, l2)` is on a shortest path iff
/// `target` tests `v` at `p` and holds neither leaf `!l1` at `p·(v,T)` nor
/// leaf `!l2` at `p·(v,F)`. A leaf edit to `l` is iff `target` holds leaf `l`
/// at `p`.
pub fn edge_on_shortest_path(edit: &Edit, target: &DecisionTree) -> bool {
    match edit {
        Edit::Leaf { path, label } => target.value_at_path(path) == PathValue::Label(*label),
        Edit::Stump { path, var, t, f } => {
            if target.value_at_path(path) != PathValue::Var(*var) {
                return false;
            }
            let mut pt = path.clone();
            pt.push((*var, true));
            let mut pf = path.clone();
            pf.push((*var, false));
            target.value_at_path(&pt) != PathValue::Label(!*t)
                && target.value_at_path(&pf) != PathValue::Label(!*f)
        }
    }
}

/// All trees over `vars` with depth at most `depth_cap`.
pub fn enumerate_trees(vars: &[Var], depth_cap: usize) -> Result<Vec<DecisionTree>> {
    if vars.len() > 3 {
        return Err(Error::InvalidParameter(format!(
            "refusing to enumerate trees over {} variables",
            vars.len()
        )));
    }
    fn go(vars: &[Var], depth: usize) -> Vec<DecisionTree> {
        let mut out = vec![DecisionTree::Leaf(false), DecisionTree::Leaf(true)];
        if depth == 0 {
            return out;
        }
        for (i, &s) in vars.iter().enumerate() {
            let rest: Vec<Var> = vars
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .collect();
            let sub = go(&rest, depth - 1);
            for t in &sub {
                for f in &sub {
                    out.push(DecisionTree::node(s, t.clone(), f.clone()));
                }
            }
        }
        out
    }
    let set: BTreeSet<DecisionTree> = go(vars, depth_cap).into_iter().collect();
    Ok(set.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::DecisionTreeGraph;
    use crate::graph::search::materialize;
    use crate::graph::LocalityGraph;

    fn tr(s: &str) -> DecisionTree {
        s.parse().unwrap()
    }

    #[test]
    fn distance_examples() {
        let d = disagreement(&tr("(v0 T F)"), &tr("(v0 F T)"));
        assert_eq!(
            d,
            Disagreement {
                structural: 0,
                leaves: 2
            }
        );
        assert_eq!(d.distance(), Length::from_integer(2));
        let a = tr("(v0 (v1 T F) T)");
        assert_eq!(disagreement(&a, &a).distance(), Length::from_integer(0));
        let d = disagreement(&DecisionTree::root(), &tr("(v0 T F)"));
        assert_eq!(
            d,
            Disagreement {
                structural: 1,
                leaves: 0
            }
        );
        assert_eq!(d.distance(), Ratio::new(11, 10));
        assert_eq!(
            disagreement(&DecisionTree::Leaf(false), &DecisionTree::Leaf(true)).distance(),
            Length::from_integer(1)
        );
    }

    #[test]
    fn levels() {
        assert_eq!(tree_level(&DecisionTree::Leaf(false)), 0);
        assert_eq!(tree_level(&DecisionTree::Leaf(true)), 1);
        assert_eq!(tree_level(&tr("(v0 T F)")), 1);
        assert_eq!(tree_level(&tr("(v0 (v1 T F) F)")), 2);
    }

    #[test]
    fn levels_match_bfs_over_two_variables() {
        let g = DecisionTreeGraph::new(2).unwrap();
        let m = materialize(&g, 1000).unwrap();
        assert_eq!(m.len(), 74);
        let bfs = m.bfs_levels();
        for (i, v) in m.vertices.iter().enumerate() {
            assert_eq!(g.level(v).unwrap(), bfs[i], "{}", g.display_vertex(v));
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_trees(&[0], 0).unwrap().len(), 2);
        assert_eq!(enumerate_trees(&[0, 1, 2], 0).unwrap().len(), 2);
        assert_eq!(enumerate_trees(&[0], 1).unwrap().len(), 6);
        assert_eq!(enumerate_trees(&[0], 5).unwrap().len(), 6);
        assert_eq!(enumerate_trees(&[0, 1], 2).unwrap().len(), 74);
        assert!(enumerate_trees(&[0, 1, 2, 3], 1).is_err());
    }

    #[test]
    fn stump_edit_toward_itself() {
        let e = Edit::Stump {
            path: vec![],
            var: 0,
            t: true,
            f: false,
        };
        assert!(edge_on_shortest_path(&e, &tr("(v0 T F)")));
        let leaf = Edit::Leaf {
            path: vec![],
            label: true,
        };
        assert!(!edge_on_shortest_path(&leaf, &tr("(v0 T F)")));
    }
}
