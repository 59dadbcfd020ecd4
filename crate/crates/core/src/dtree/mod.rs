//! Boolean decision trees as an action space.
//!
//! A tree is edited by replacing the subtree at some path with a label
//! (length 1) or with a one-split stump (length 11/10). The resulting edit
//! graph has a closed-form shortest-path distance, [`disagreement`], and an
//! admissible edge coloring by "(path, replacement)".

mod edits;
mod metric;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::VertexId;

pub use edits::{DecisionTreeGraph, Edit, TreeEditColor};
pub use metric::{disagreement, edge_on_shortest_path, enumerate_trees, tree_level, Disagreement};

/// Variable index.
pub type Var = u16;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DecisionTree {
    Leaf(bool),
    Node {
        var: Var,
        t: Box<DecisionTree>,
        f: Box<DecisionTree>,
    },
}

/// A root-to-node path: the variable tested at each step and the branch taken.
pub type TreePath = Vec<(Var, bool)>;

/// What a tree holds at the end of a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathValue {
    Var(Var),
    Label(bool),
    Absent,
}

const TAG_FALSE: u8 = 0;
const TAG_TRUE: u8 = 1;
const TAG_NODE: u8 = 2;

impl DecisionTree {
    pub fn leaf(label: bool) -> Self {
        DecisionTree::Leaf(label)
    }

    pub fn node(var: Var, t: DecisionTree, f: DecisionTree) -> Self {
        DecisionTree::Node {
            var,
            t: Box::new(t),
            f: Box::new(f),
        }
    }

    /// The root of the edit graph: the constant-false tree.
    pub fn root() -> Self {
        DecisionTree::Leaf(false)
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<bool> {
        let mut cur = self;
        loop {
            match cur {
                DecisionTree::Leaf(l) => return Ok(*l),
                DecisionTree::Node { var, t, f } => {
                    let bit = x.get(*var as usize).ok_or_else(|| {
                        Error::Input(format!(
                            "variable {var} unassigned in a {}-feature instance",
                            x.len()
                        ))
                    })?;
                    cur = if *bit { t } else { f };
                }
            }
        }
    }

    pub fn subtree_at(&self, path: &[(Var, bool)]) -> Option<&DecisionTree> {
        let mut cur = self;
        for &(v, branch) in path {
            match cur {
                DecisionTree::Node { var, t, f } if *var == v => cur = if branch { t } else { f },
                _ => return None,
            }
        }
        Some(cur)
    }

    pub fn value_at_path(&self, path: &[(Var, bool)]) -> PathValue {
        match self.subtree_at(path) {
            Some(DecisionTree::Leaf(l)) => PathValue::Label(*l),
            Some(DecisionTree::Node { var, .. }) => PathValue::Var(*var),
            None => PathValue::Absent,
        }
    }

    /// Replaces the subtree at `path` by `replacement`. An absent path leaves
    /// the tree unchanged. Fails if the result repeats a variable on a path.
    pub fn replace_at_path(
        &self,
        path: &[(Var, bool)],
        replacement: DecisionTree,
    ) -> Result<DecisionTree> {
        if self.subtree_at(path).is_none() {
            return Ok(self.clone());
        }
        let out = self.replaced(path, replacement);
        if !out.is_valid() {
            return Err(Error::IllegalEdit(format!(
                "replacing at {path:?} repeats a variable: {out}"
            )));
        }
        Ok(out)
    }

    /// Unchecked replacement; `path` must be present.
    pub(crate) fn replaced(&self, path: &[(Var, bool)], replacement: DecisionTree) -> DecisionTree {
        match (path.split_first(), self) {
            (None, _) => replacement,
            (Some((&(_, branch), rest)), DecisionTree::Node { var, t, f }) => {
                if branch {
                    DecisionTree::Node {
                        var: *var,
                        t: Box::new(t.replaced(rest, replacement)),
                        f: f.clone(),
                    }
                } else {
                    DecisionTree::Node {
                        var: *var,
                        t: t.clone(),
                        f: Box::new(f.replaced(rest, replacement)),
                    }
                }
            }
            (Some(_), DecisionTree::Leaf(_)) => unreachable!("path checked present"),
        }
    }

    /// No variable occurs twice on any root-to-leaf path.
    pub fn is_valid(&self) -> bool {
        fn go(t: &DecisionTree, seen: &mut Vec<Var>) -> bool {
            match t {
                DecisionTree::Leaf(_) => true,
                DecisionTree::Node { var, t, f } => {
                    if seen.contains(var) {
                        return false;
                    }
                    seen.push(*var);
                    let ok = go(t, seen) && go(f, seen);
                    seen.pop();
                    ok
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Every path present in the tree, in preorder (true branch first).
    pub fn paths(&self) -> Vec<TreePath> {
        fn go(t: &DecisionTree, prefix: &mut TreePath, out: &mut Vec<TreePath>) {
            out.push(prefix.clone());
            if let DecisionTree::Node { var, t, f } = t {
                prefix.push((*var, true));
                go(t, prefix, out);
                prefix.pop();
                prefix.push((*var, false));
                go(f, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn internal_nodes(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { t, f, .. } => 1 + t.internal_nodes() + f.internal_nodes(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { t, f, .. } => 1 + t.depth().max(f.depth()),
        }
    }

    /// Canonical preorder bytes.
    pub fn encode(&self) -> VertexId {
        fn go(t: &DecisionTree, out: &mut Vec<u8>) {
            match t {
                DecisionTree::Leaf(false) => out.push(TAG_FALSE),
                DecisionTree::Leaf(true) => out.push(TAG_TRUE),
                DecisionTree::Node { var, t, f } => {
                    out.push(TAG_NODE);
                    out.extend_from_slice(&var.to_le_bytes());
                    go(t, out);
                    go(f, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        VertexId::from_vec(out)
    }

    pub fn decode(v: &VertexId) -> Result<Self> {
        fn go(b: &[u8], pos: &mut usize) -> Option<DecisionTree> {
            let tag = *b.get(*pos)?;
            *pos += 1;
            match tag {
                TAG_FALSE => Some(DecisionTree::Leaf(false)),
                TAG_TRUE => Some(DecisionTree::Leaf(true)),
                TAG_NODE => {
                    let var = u16::from_le_bytes([*b.get(*pos)?, *b.get(*pos + 1)?]);
                    *pos += 2;
                    let t = go(b, pos)?;
                    let f = go(b, pos)?;
                    Some(DecisionTree::node(var, t, f))
                }
                _ => None,
            }
        }
        let bytes = v.as_bytes();
        let mut pos = 0;
        let bad = |reason: &str| Error::Decode {
            vertex: v.clone(),
            reason: reason.into(),
        };
        let tree = go(bytes, &mut pos).ok_or_else(|| bad("malformed tree encoding"))?;
        if pos != bytes.len() {
            return Err(bad("trailing bytes after tree"));
        }
        if !tree.is_valid() {
            return Err(bad("variable repeated on a path"));
        }
        Ok(tree)
    }
}

impl fmt::Display for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionTree::Leaf(true) => write!(f, "T"),
            DecisionTree::Leaf(false) => write!(f, "F"),
            DecisionTree::Node { var, t, f: fb } => write!(f, "(v{var} {t} {fb})"),
        }
    }
}

impl fmt::Debug for DecisionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DecisionTree {
    type Err = Error;

    /// Parses the text form `(v3 (v1 T F) F)`.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<String> = s
            .replace('(', " ( ")
            .replace(')', " ) ")
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let mut pos = 0;
        let tree = parse_tokens(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Input(format!("trailing input in tree `{s}`")));
        }
        if !tree.is_valid() {
            return Err(Error::Input(format!(
                "tree `{s}` repeats a variable on a path"
            )));
        }
        Ok(tree)
    }
}

fn parse_tokens(tokens: &[String], pos: &mut usize) -> Result<DecisionTree> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| Error::Input("unexpected end of tree".into()))?;
    *pos += 1;
    match tok.as_str() {
        "T" => Ok(DecisionTree::Leaf(true)),
        "F" => Ok(DecisionTree::Leaf(false)),
        "(" => {
            let name = tokens
                .get(*pos)
                .ok_or_else(|| Error::Input("missing variable".into()))?;
            *pos += 1;
            let var: Var = name
                .strip_prefix('v')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| Error::Input(format!("bad variable `{name}`")))?;
            let t = parse_tokens(tokens, pos)?;
            let f = parse_tokens(tokens, pos)?;
            if tokens.get(*pos).map(String::as_str) != Some(")") {
                return Err(Error::Input("expected `)`".into()));
            }
            *pos += 1;
            Ok(DecisionTree::node(var, t, f))
        }
        other => Err(Error::Input(format!("unexpected token `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(s: &str) -> DecisionTree {
        s.parse().unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert!(DecisionTree::Leaf(true).evaluate(&[false, true]).unwrap());
        let t = tr("(v1 (v2 T F) F)");
        assert!(!t.evaluate(&[false, true, false]).unwrap());
        assert!(t.evaluate(&[false, true, true]).unwrap());
        assert!(!t.evaluate(&[false, false, true]).unwrap());
        assert!(matches!(t.evaluate(&[true]), Err(Error::Input(_))));
    }

    #[test]
    fn value_at_path_examples() {
        assert_eq!(
            DecisionTree::Leaf(true).value_at_path(&[]),
            PathValue::Label(true)
        );
        let t = tr("(v1 F T)");
        assert_eq!(t.value_at_path(&[(1, true)]), PathValue::Label(false));
        assert_eq!(t.value_at_path(&[(2, true)]), PathValue::Absent);
        assert_eq!(t.value_at_path(&[]), PathValue::Var(1));
    }

    #[test]
    fn replace_examples() {
        let t = tr("(v1 (v2 T F) F)");
        assert_eq!(
            t.replace_at_path(&[], DecisionTree::Leaf(true)).unwrap(),
            DecisionTree::Leaf(true)
        );
        assert_eq!(
            t.replace_at_path(&[(1, false)], DecisionTree::Leaf(true))
                .unwrap(),
            tr("(v1 (v2 T F) T)")
        );
        assert_eq!(
            t.replace_at_path(&[(3, false)], DecisionTree::Leaf(true))
                .unwrap(),
            t
        );
        let bad = t.replace_at_path(&[(1, true), (2, true)], tr("(v1 T F)"));
        assert!(matches!(bad, Err(Error::IllegalEdit(_))));
    }

    #[test]
    fn encoding_round_trip() {
        let t = tr("(v3 (v1 T F) F)");
        assert_eq!(t.to_string(), "(v3 (v1 T F) F)");
        let enc = t.encode();
        assert_eq!(enc.as_bytes(), &[2, 3, 0, 2, 1, 0, 1, 0, 0]);
        assert_eq!(DecisionTree::decode(&enc).unwrap(), t);
        assert!(DecisionTree::decode(&VertexId::from_bytes(&[2, 0])).is_err());
        assert!(DecisionTree::decode(&VertexId::from_bytes(&[0, 0])).is_err());
        assert!(DecisionTree::decode(
            &tr("(v1 T F)")
                .replaced(&[(1, true)], tr("(v1 T F)"))
                .encode()
        )
        .is_err());
        assert!("(v1 (v1 T F) F)".parse::<DecisionTree>().is_err());
    }

    #[test]
    fn paths_in_preorder() {
        let t = tr("(v0 (v1 T F) F)");
        assert_eq!(
            t.paths(),
            vec![
                vec![],
                vec![(0, true)],
                vec![(0, true), (1, true)],
                vec![(0, true), (1, false)],
                vec![(0, false)]
            ]
        );
    }
}
