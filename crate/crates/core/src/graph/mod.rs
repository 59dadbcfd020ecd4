//! Locality graphs: the contract every action space implements, plus the
//! built-in hypercube, complete-graph, Cartesian-product and explicit graphs.
//!
//! Graphs are presented lazily. A graph knows its root, can enumerate the
//! out-edges of any vertex it can decode, and reports each vertex's level
//! (unweighted distance from the root) analytically. Nothing here ever
//! materializes the whole vertex set; [`search`] does bounded materialization
//! for verification-scale checks only.

mod complete;
mod explicit;
pub(crate) mod hypercube;
mod product;
pub mod search;

use std::fmt;

use num_rational::Ratio;
use smallvec::SmallVec;

use crate::error::Result;

pub use complete::CompleteGraph;
pub use explicit::ExplicitGraph;
pub use hypercube::{get_bit, pack_bits, Hypercube, HypercubeColor};
pub use product::ProductGraph;

/// Exact edge length. Decision-tree edges have lengths 1 and 11/10, and the
/// shortest-path tests compare sums of lengths for equality, so lengths are
/// kept rational rather than floating.
pub type Length = Ratio<u64>;

pub fn unit_length() -> Length {
    Length::from_integer(1)
}

/// Canonical byte encoding of one action. Equality and ordering are byte-wise.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VertexId(SmallVec<[u8; 24]>);

impl VertexId {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        VertexId(SmallVec::from_slice(bytes))
    }

    pub fn from_vec(bytes: Vec<u8>) -> Self {
        VertexId(SmallVec::from_vec(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V[")?;
        for b in self.0.iter() {
            write!(f, "{b:02x}")?;
        }
        write!(f, "]")
    }
}

/// Canonical byte encoding of a color class.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ColorId(SmallVec<[u8; 24]>);

impl ColorId {
    pub fn from_bytes(bytes: &[u8]) -> Self {
        ColorId(SmallVec::from_slice(bytes))
    }

    pub fn from_vec(bytes: Vec<u8>) -> Self {
        ColorId(SmallVec::from_vec(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C[")?;
        for b in self.0.iter() {
            write!(f, "{b:02x}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: VertexId,
    pub target: VertexId,
    pub length: Length,
    pub color: ColorId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphMeta {
    /// Upper bound `D` on the out-degree of any vertex.
    pub degree_bound: u64,
    /// Bound on `|u(a) - u(b)|` for the utilities this graph is paired with.
    pub utility_span: f64,
    pub root: VertexId,
}

/// Behavioral contract of a locality graph over an action set.
///
/// Implementations must be immutable after construction; every method is a
/// pure function of its arguments.
pub trait LocalityGraph: Send + Sync {
    fn meta(&self) -> &GraphMeta;

    fn root(&self) -> VertexId {
        self.meta().root.clone()
    }

    fn degree_bound(&self) -> u64 {
        self.meta().degree_bound
    }

    /// Every out-edge of `v` exactly once. Never contains self-loops.
    fn out_edges(&self, v: &VertexId) -> Result<Vec<Edge>>;

    /// Unweighted shortest-path distance from the root.
    fn level(&self, v: &VertexId) -> Result<usize>;

    /// The unique out-edge of `v` with color `color`, if any.
    ///
    /// Colors are injective per vertex, so there is at most one. Graphs with
    /// structured colors override this to avoid enumerating all out-edges.
    fn edge_with_color(&self, v: &VertexId, color: &ColorId) -> Result<Option<Edge>> {
        Ok(self.out_edges(v)?.into_iter().find(|e| &e.color == color))
    }

    /// Human-readable rendering of a vertex, used in traces and witnesses.
    fn display_vertex(&self, v: &VertexId) -> String {
        format!("{v:?}")
    }

    fn display_color(&self, c: &ColorId) -> String {
        format!("{c:?}")
    }

    /// `Some(n)` when this graph is the `n`-cube with the standard coloring,
    /// which lets the colored solver factor over coordinates.
    fn hypercube_dimension(&self) -> Option<usize> {
        None
    }
}

impl<G: LocalityGraph + ?Sized> LocalityGraph for &G {
    fn meta(&self) -> &GraphMeta {
        (**self).meta()
    }
    fn out_edges(&self, v: &VertexId) -> Result<Vec<Edge>> {
        (**self).out_edges(v)
    }
    fn level(&self, v: &VertexId) -> Result<usize> {
        (**self).level(v)
    }
    fn edge_with_color(&self, v: &VertexId, color: &ColorId) -> Result<Option<Edge>> {
        (**self).edge_with_color(v, color)
    }
    fn display_vertex(&self, v: &VertexId) -> String {
        (**self).display_vertex(v)
    }
    fn display_color(&self, c: &ColorId) -> String {
        (**self).display_color(c)
    }
    fn hypercube_dimension(&self) -> Option<usize> {
        (**self).hypercube_dimension()
    }
}

impl<G: LocalityGraph + ?Sized> LocalityGraph for Box<G> {
    fn meta(&self) -> &GraphMeta {
        (**self).meta()
    }
    fn out_edges(&self, v: &VertexId) -> Result<Vec<Edge>> {
        (**self).out_edges(v)
    }
    fn level(&self, v: &VertexId) -> Result<usize> {
        (**self).level(v)
    }
    fn edge_with_color(&self, v: &VertexId, color: &ColorId) -> Result<Option<Edge>> {
        (**self).edge_with_color(v, color)
    }
    fn display_vertex(&self, v: &VertexId) -> String {
        (**self).display_vertex(v)
    }
    fn display_color(&self, c: &ColorId) -> String {
        (**self).display_color(c)
    }
    fn hypercube_dimension(&self) -> Option<usize> {
        (**self).hypercube_dimension()
    }
}

impl<G: LocalityGraph + ?Sized> LocalityGraph for std::sync::Arc<G> {
    fn meta(&self) -> &GraphMeta {
        (**self).meta()
    }
    fn out_edges(&self, v: &VertexId) -> Result<Vec<Edge>> {
        (**self).out_edges(v)
    }
    fn level(&self, v: &VertexId) -> Result<usize> {
        (**self).level(v)
    }
    fn edge_with_color(&self, v: &VertexId, color: &ColorId) -> Result<Option<Edge>> {
        (**self).edge_with_color(v, color)
    }
    fn display_vertex(&self, v: &VertexId) -> String {
        (**self).display_vertex(v)
    }
    fn display_color(&self, c: &ColorId) -> String {
        (**self).display_color(c)
    }
    fn hypercube_dimension(&self) -> Option<usize> {
        (**self).hypercube_dimension()
    }
}

/// Level cap `L` of the regret-matching policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LevelCap {
    Bounded(usize),
    Unbounded,
}

impl LevelCap {
    pub fn admits(self, level: usize) -> bool {
        match self {
            LevelCap::Bounded(l) => level <= l,
            LevelCap::Unbounded => true,
        }
    }

    pub fn bound(self) -> Option<usize> {
        match self {
            LevelCap::Bounded(l) => Some(l),
            LevelCap::Unbounded => None,
        }
    }
}

impl fmt::Display for LevelCap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelCap::Bounded(l) => write!(f, "{l}"),
            LevelCap::Unbounded => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for LevelCap {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "unbounded" => Ok(LevelCap::Unbounded),
            t => t
                .parse::<usize>()
                .map(LevelCap::Bounded)
                .map_err(|e| format!("level cap must be a nonnegative integer or `inf`: {e}")),
        }
    }
}

/// Verifies the per-vertex invariants of `out_edges(v)`: bounded degree,
/// positive lengths, no self-loops, injective colors. Returns a description
/// of the first violation.
pub fn check_vertex_contract<G: LocalityGraph + ?Sized>(
    graph: &G,
    v: &VertexId,
) -> Result<Option<String>> {
    let edges = graph.out_edges(v)?;
    if edges.len() as u64 > graph.degree_bound() {
        return Ok(Some(format!(
            "{} has {} out-edges, degree bound {}",
            graph.display_vertex(v),
            edges.len(),
            graph.degree_bound()
        )));
    }
    let mut colors = std::collections::BTreeSet::new();
    for e in &edges {
        if e.length <= Length::from_integer(0) {
            return Ok(Some(format!("non-positive length on {e:?}")));
        }
        if e.source == e.target {
            return Ok(Some(format!("self-loop at {}", graph.display_vertex(v))));
        }
        if &e.source != v {
            return Ok(Some(format!("edge {e:?} does not start at queried vertex")));
        }
        if !colors.insert(e.color.clone()) {
            return Ok(Some(format!(
                "duplicate color {} at {}",
                graph.display_color(&e.color),
                graph.display_vertex(v)
            )));
        }
    }
    Ok(None)
}
