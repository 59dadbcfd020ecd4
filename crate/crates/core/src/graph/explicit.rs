use std::collections::VecDeque;

use super::{unit_length, ColorId, Edge, GraphMeta, Length, LocalityGraph, VertexId};
use crate::error::{Error, Result};

/// A small graph given by an explicit edge list, used for fuzzing and
/// hand-built examples. Vertices are `0..n` (encoded as `u16` little-endian),
/// vertex 0 is the root, and levels come from a BFS done at construction.
///
/// By default an edge is colored by its target index, which is injective per
/// vertex because parallel edges are rejected.
#[derive(Clone, Debug)]
pub struct ExplicitGraph {
    adjacency: Vec<Vec<Edge>>,
    levels: Vec<Option<usize>>,
    meta: GraphMeta,
}

impl ExplicitGraph {
    /// Builds a graph on `n` vertices from `(source, target, length)` triples.
    pub fn new(n: usize, edges: &[(usize, usize, Length)]) -> Result<Self> {
        let colored: Vec<_> = edges
            .iter()
            .map(|&(s, t, len)| (s, t, len, ColorId::from_bytes(&(t as u16).to_le_bytes())))
            .collect();
        Self::with_colors(n, &colored)
    }

    /// Unit-length convenience constructor.
    pub fn unit(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let e: Vec<_> = edges.iter().map(|&(s, t)| (s, t, unit_length())).collect();
        Self::new(n, &e)
    }

    pub fn with_colors(n: usize, edges: &[(usize, usize, Length, ColorId)]) -> Result<Self> {
        if n == 0 || n > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "explicit graph size {n} out of range"
            )));
        }
        let mut adjacency: Vec<Vec<Edge>> = vec![Vec::new(); n];
        for (s, t, len, color) in edges {
            let (s, t) = (*s, *t);
            if s >= n || t >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({s},{t}) out of range"
                )));
            }
            if s == t {
                return Err(Error::InvalidParameter(format!("self-loop at {s}")));
            }
            if *len <= Length::from_integer(0) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({s},{t}) has length {len}"
                )));
            }
            let target = Self::encode(t);
            if adjacency[s].iter().any(|e| e.target == target) {
                return Err(Error::InvalidParameter(format!("parallel edge ({s},{t})")));
            }
            if adjacency[s].iter().any(|e| &e.color == color) {
                return Err(Error::ColoringViolation {
                    vertex: Self::encode(s),
                    color: format!("{color:?}"),
                });
            }
            adjacency[s].push(Edge {
                source: Self::encode(s),
                target,
                length: *len,
                color: color.clone(),
            });
        }
        for list in &mut adjacency {
            list.sort();
        }

        let mut levels = vec![None; n];
        levels[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let next = levels[i].unwrap() + 1;
            for e in &adjacency[i] {
                let j = Self::decode_index(&e.target);
                if levels[j].is_none() {
                    levels[j] = Some(next);
                    queue.push_back(j);
                }
            }
        }

        let degree_bound = adjacency.iter().map(Vec::len).max().unwrap_or(0) as u64;
        Ok(ExplicitGraph {
            adjacency,
            levels,
            meta: GraphMeta {
                degree_bound,
                utility_span: 1.0,
                root: Self::encode(0),
            },
        })
    }

    pub fn size(&self) -> usize {
        self.adjacency.len()
    }

    pub fn vertex(&self, i: usize) -> VertexId {
        assert!(i < self.size(), "vertex {i} out of range");
        Self::encode(i)
    }

    pub fn all_vertices(&self) -> Vec<VertexId> {
        (0..self.size()).map(Self::encode).collect()
    }

    pub fn index(&self, v: &VertexId) -> Result<usize> {
        let b = v.as_bytes();
        if b.len() != 2 {
            return Err(Error::Decode {
                vertex: v.clone(),
                reason: "expected 2 bytes".into(),
            });
        }
        let i = u16::from_le_bytes([b[0], b[1]]) as usize;
        if i >= self.size() {
            return Err(Error::Decode {
                vertex: v.clone(),
                reason: format!("vertex {i} out of range"),
            });
        }
        Ok(i)
    }

    /// All edges, grouped by source in index order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.adjacency.iter().flatten()
    }

    fn encode(i: usize) -> VertexId {
        VertexId::from_bytes(&(i as u16).to_le_bytes())
    }

    fn decode_index(v: &VertexId) -> usize {
        let b = v.as_bytes();
        u16::from_le_bytes([b[0], b[1]]) as usize
    }
}

impl LocalityGraph for ExplicitGraph {
    fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    fn out_edges(&self, v: &VertexId) -> Result<Vec<Edge>> {
        Ok(self.adjacency[self.index(v)?].clone())
    }

    fn level(&self, v: &VertexId) -> Result<usize> {
        self.levels[self.index(v)?].ok_or_else(|| Error::Unreachable(v.clone()))
    }

    fn display_vertex(&self, v: &VertexId) -> String {
        match self.index(v) {
            Ok(i) => format!("v{i}"),
            Err(_) => format!("{v:?}"),
        }
    }
}
