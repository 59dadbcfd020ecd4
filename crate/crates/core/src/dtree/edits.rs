use num_rational::Ratio;

use super::{metric, DecisionTree, PathValue, TreePath, Var};
use crate::error::{Error, Result};
use crate::graph::{ColorId, Edge, GraphMeta, Length, LocalityGraph, VertexId};

/// A single edit: what replaces the subtree at `path`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edit {
    Leaf {
        path: TreePath,
        label: bool,
    },
    Stump {
        path: TreePath,
        var: Var,
        t: bool,
        f: bool,
    },
}

/// Edge color of an edit. It names the path and the replacement, so it is
/// the edit itself viewed as a color.
pub type TreeEditColor = Edit;

impl Edit {
    pub fn path(&self) -> &TreePath {
        match self {
            Edit::Leaf { path, .. } | Edit::Stump { path, .. } => path,
        }
    }

    pub fn length(&self) -> Length {
        match self {
            Edit::Leaf { .. } => Length::from_integer(1),
            Edit::Stump { .. } => Ratio::new(11, 10),
        }
    }

    pub fn replacement(&self) -> DecisionTree {
        match self {
            Edit::Leaf { label, .. } => DecisionTree::Leaf(*label),
            Edit::Stump { var, t, f, .. } => {
                DecisionTree::node(*var, DecisionTree::Leaf(*t), DecisionTree::Leaf(*f))
            }
        }
    }

    /// Whether this edit is a legal out-edge of `tree`.
    pub fn applies_to(&self, tree: &DecisionTree) -> bool {
        let at = tree.value_at_path(self.path());
        match self {
            Edit::Leaf { label, .. } => at != PathValue::Absent && at != PathValue::Label(*label),
            Edit::Stump { path, var, .. } => {
                at != PathValue::Absent
                    && at != PathValue::Var(*var)
                    && path.iter().all(|(v, _)| v != var)
            }
        }
    }

    pub fn apply(&self, tree: &DecisionTree) -> DecisionTree {
        tree.replaced(self.path(), self.replacement())
    }

    pub fn encode(&self) -> ColorId {
        let mut out = Vec::new();
        let path = self.path();
        out.push(match self {
            Edit::Leaf { .. } => 0u8,
            Edit::Stump { .. } => 1u8,
        });
        out.extend_from_slice(&(path.len() as u16).to_le_bytes());
        for (v, b) in path {
            out.extend_from_slice(&v.to_le_bytes());
            out.push(*b as u8);
        }
        match self {
            Edit::Leaf { label, .. } => out.push(*label as u8),
            Edit::Stump { var, t, f, .. } => {
                out.extend_from_slice(&var.to_le_bytes());
                out.push(*t as u8);
                out.push(*f as u8);
            }
        }
        ColorId::from_vec(out)
    }

    pub fn decode(c: &ColorId) -> Option<Edit> {
        let b = c.as_bytes();
        let kind = *b.first()?;
        let len = u16::from_le_bytes([*b.get(1)?, *b.get(2)?]) as usize;
        let mut pos = 3;
        let mut path = Vec::with_capacity(len);
        for _ in 0..len {
            let v = u16::from_le_bytes([*b.get(pos)?, *b.get(pos + 1)?]);
            let br = *b.get(pos + 2)?;
            if br > 1 {
                return None;
            }
            path.push((v, br == 1));
            pos += 3;
        }
        let flag = |x: u8| if x <= 1 { Some(x == 1) } else { None };
        let edit = match kind {
            0 => Edit::Leaf {
                path,
                label: flag(*b.get(pos)?)?,
            },
            1 => {
                let var = u16::from_le_bytes([*b.get(pos)?, *b.get(pos + 1)?]);
                Edit::Stump {
                    path,
                    var,
                    t: flag(*b.get(pos + 2)?)?,
                    f: flag(*b.get(pos + 3)?)?,
                }
            }
            _ => return None,
        };
        let consumed = pos + if kind == 0 { 1 } else { 4 };
        (consumed == b.len()).then_some(edit)
    }
}

impl std::fmt::Display for Edit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let path: Vec<String> = self
            .path()
            .iter()
            .map(|(v, b)| format!("v{v}={}", if *b { 'T' } else { 'F' }))
            .collect();
        match self {
            Edit::Leaf { label, .. } => write!(
                f,
                "[{}]<-{}",
                path.join(","),
                if *label { 'T' } else { 'F' }
            ),
            Edit::Stump { var, t, f: fl, .. } => write!(
                f,
                "[{}]<-(v{var} {} {})",
                path.join(","),
                if *t { 'T' } else { 'F' },
                if *fl { 'T' } else { 'F' }
            ),
        }
    }
}

/// Every legal edit of `tree` over variables `0..n_vars`: leaf edits that
/// change something, and stump edits on variables not already on the path
/// and not already tested at that node.
pub fn edits(tree: &DecisionTree, n_vars: usize) -> Vec<Edit> {
    let mut out = Vec::new();
    for path in tree.paths() {
        let at = tree.value_at_path(&path);
        for label in [false, true] {
            if at != PathValue::Label(label) {
                out.push(Edit::Leaf {
                    path: path.clone(),
                    label,
                });
            }
        }
        for var in 0..n_vars as Var {
            if at == PathValue::Var(var) || path.iter().any(|(v, _)| *v == var) {
                continue;
            }
            for (t, f) in [(false, false), (false, true), (true, false), (true, true)] {
                out.push(Edit::Stump {
                    path: path.clone(),
                    var,
                    t,
                    f,
                });
            }
        }
    }
    out
}

/// The edit graph over trees on `n_vars` boolean variables, rooted at the
/// constant-false tree.
#[derive(Clone, Debug)]
pub struct DecisionTreeGraph {
    n_vars: usize,
    meta: GraphMeta,
}

impl DecisionTreeGraph {
    pub fn new(n_vars: usize) -> Result<Self> {
        if n_vars == 0 || n_vars > Var::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "tree graph over {n_vars} variables"
            )));
        }
        Ok(DecisionTreeGraph {
            n_vars,
            meta: GraphMeta {
                degree_bound: degree_bound(n_vars),
                utility_span: 1.0,
                root: DecisionTree::root().encode(),
            },
        })
    }

    pub fn with_utility_span(mut self, span: f64) -> Self {
        self.meta.utility_span = span;
        self
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    fn tree(&self, v: &VertexId) -> Result<DecisionTree> {
        let t = DecisionTree::decode(v)?;
        if !tree_uses_only(&t, self.n_vars) {
            return Err(Error::Decode {
                vertex: v.clone(),
                reason: format!("variable outside 0..{}", self.n_vars),
            });
        }
        Ok(t)
    }
}

fn tree_uses_only(t: &DecisionTree, n: usize) -> bool {
    match t {
        DecisionTree::Leaf(_) => true,
        DecisionTree::Node { var, t, f } => {
            (*var as usize) < n && tree_uses_only(t, n) && tree_uses_only(f, n)
        }
    }
}

/// `(n+1) * 2^(n+1)`, saturating.
pub fn degree_bound(n_vars: usize) -> u64 {
    let n = n_vars as u64;
    u32::try_from(n + 1)
        .ok()
        .and_then(|e| 2u64.checked_pow(e))
        .and_then(|p| p.checked_mul(n + 1))
        .unwrap_or(u64::MAX)
}

impl LocalityGraph for DecisionTreeGraph {
    fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    fn out_edges(&self, v: &VertexId) -> Result<Vec<Edge>> {
        let t = self.tree(v)?;
        Ok(edits(&t, self.n_vars)
            .into_iter()
            .map(|e| Edge {
                source: v.clone(),
                target: e.apply(&t).encode(),
                length: e.length(),
                color: e.encode(),
            })
            .collect())
    }

    fn level(&self, v: &VertexId) -> Result<usize> {
        Ok(metric::tree_level(&self.tree(v)?))
    }

    fn edge_with_color(&self, v: &VertexId, color: &ColorId) -> Result<Option<Edge>> {
        let t = self.tree(v)?;
        let Some(edit) = Edit::decode(color) else {
            return Ok(None);
        };
        if let Edit::Stump { var, .. } = edit {
            if var as usize >= self.n_vars {
                return Ok(None);
            }
        }
        if !edit.applies_to(&t) {
            return Ok(None);
        }
        Ok(Some(Edge {
            source: v.clone(),
            target: edit.apply(&t).encode(),
            length: edit.length(),
            color: color.clone(),
        }))
    }

    fn display_vertex(&self, v: &VertexId) -> String {
        DecisionTree::decode(v)
            .map(|t| t.to_string())
            .unwrap_or_else(|_| format!("{v:?}"))
    }

    fn display_color(&self, c: &ColorId) -> String {
        Edit::decode(c)
            .map(|e| e.to_string())
            .unwrap_or_else(|| format!("{c:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::check_vertex_contract;

    fn tr(s: &str) -> DecisionTree {
        s.parse().unwrap()
    }

    #[test]
    fn root_has_five_neighbors_over_one_variable() {
        let g = DecisionTreeGraph::new(1).unwrap();
        let edges = g.out_edges(&g.root()).unwrap();
        assert_eq!(edges.len(), 5);
        let leaf: Vec<_> = edges
            .iter()
            .filter(|e| e.length == Length::from_integer(1))
            .collect();
        assert_eq!(leaf.len(), 1);
        assert_eq!(g.display_vertex(&leaf[0].target), "T");
        let stump = edges
            .iter()
            .find(|e| e.target == tr("(v0 T F)").encode())
            .unwrap();
        assert_eq!(stump.length, Ratio::new(11, 10));
        assert_eq!(
            Edit::decode(&stump.color),
            Some(Edit::Stump {
                path: vec![],
                var: 0,
                t: true,
                f: false
            })
        );
    }

    #[test]
    fn no_same_variable_stump_at_a_node() {
        let g = DecisionTreeGraph::new(1).unwrap();
        let t = tr("(v0 T F)");
        for e in g.out_edges(&t.encode()).unwrap() {
            let target = DecisionTree::decode(&e.target).unwrap();
            if let DecisionTree::Node { var: 0, t: a, f: b } = &target {
                // Only leaf edits below the root keep v0 at the root.
                assert!(
                    matches!(**a, DecisionTree::Leaf(_)) && matches!(**b, DecisionTree::Leaf(_))
                );
                assert_ne!(
                    Edit::decode(&e.color).unwrap().path(),
                    &Vec::<(Var, bool)>::new()
                );
            }
        }
    }

    #[test]
    fn contract_and_degree_bound() {
        let g = DecisionTreeGraph::new(2).unwrap();
        assert_eq!(g.degree_bound(), 24);
        for t in crate::dtree::enumerate_trees(&[0, 1], 2).unwrap() {
            assert_eq!(check_vertex_contract(&g, &t.encode()).unwrap(), None, "{t}");
        }
        assert_eq!(degree_bound(200), u64::MAX);
    }

    #[test]
    fn color_lookup_matches_enumeration() {
        let g = DecisionTreeGraph::new(2).unwrap();
        let v = tr("(v0 (v1 T F) F)").encode();
        for e in g.out_edges(&v).unwrap() {
            assert_eq!(g.edge_with_color(&v, &e.color).unwrap(), Some(e));
        }
        let same = Edit::Stump {
            path: vec![],
            var: 0,
            t: true,
            f: true,
        }
        .encode();
        assert_eq!(g.edge_with_color(&v, &same).unwrap(), None);
    }
}
