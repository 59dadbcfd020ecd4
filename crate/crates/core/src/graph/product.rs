use std::sync::Arc;

use super::{ColorId, Edge, GraphMeta, LocalityGraph, VertexId};
use crate::error::{Error, Result};

/// Cartesian product `G_1 x ... x G_k`.
///
/// A vertex is a tuple of factor vertices, encoded as a sequence of
/// `u16`-length-prefixed factor encodings. An edge changes exactly one
/// component `l` along an edge of `G_l`, inheriting its length; its color is
/// `(l, factor color)`.
#[derive(Clone)]
pub struct ProductGraph {
    factors: Vec<Arc<dyn LocalityGraph>>,
    meta: GraphMeta,
}

impl std::fmt::Debug for ProductGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProductGraph")
            .field("factors", &self.factors.len())
            .field("meta", &self.meta)
            .finish()
    }
}

impl ProductGraph {
    pub fn new(factors: Vec<Arc<dyn LocalityGraph>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter(
                "product needs at least one factor".into(),
            ));
        }
        let roots: Vec<VertexId> = factors.iter().map(|g| g.root()).collect();
        let degree_bound = factors.iter().map(|g| g.degree_bound()).sum();
        let utility_span = factors
            .iter()
            .map(|g| g.meta().utility_span)
            .fold(0.0, f64::max);
        Ok(ProductGraph {
            meta: GraphMeta {
                degree_bound,
                utility_span,
                root: Self::compose(&roots),
            },
            factors,
        })
    }

    pub fn factors(&self) -> &[Arc<dyn LocalityGraph>] {
        &self.factors
    }

    pub fn compose(parts: &[VertexId]) -> VertexId {
        let mut bytes = Vec::with_capacity(parts.iter().map(|p| p.len() + 2).sum());
        for p in parts {
            bytes.extend_from_slice(&(p.len() as u16).to_le_bytes());
            bytes.extend_from_slice(p.as_bytes());
        }
        VertexId::from_vec(bytes)
    }

    pub fn components(&self, v: &VertexId) -> Result<Vec<VertexId>> {
        let bad = |reason: &str| Error::Decode {
            vertex: v.clone(),
            reason: reason.into(),
        };
        let mut rest = v.as_bytes();
        let mut parts = Vec::with_capacity(self.factors.len());
        while !rest.is_empty() {
            if rest.len() < 2 {
                return Err(bad("truncated length prefix"));
            }
            let len = u16::from_le_bytes([rest[0], rest[1]]) as usize;
            rest = &rest[2..];
            if rest.len() < len {
                return Err(bad("truncated component"));
            }
            parts.push(VertexId::from_bytes(&rest[..len]));
            rest = &rest[len..];
        }
        if parts.len() != self.factors.len() {
            return Err(bad("wrong number of components"));
        }
        Ok(parts)
    }

    pub fn lift_color(l: usize, c: &ColorId) -> ColorId {
        let mut bytes = (l as u16).to_le_bytes().to_vec();
        bytes.extend_from_slice(c.as_bytes());
        ColorId::from_vec(bytes)
    }

    /// Splits a product color into its component index and factor color.
    pub fn split_color(c: &ColorId) -> Option<(usize, ColorId)> {
        let b = c.as_bytes();
        if b.len() < 2 {
            return None;
        }
        Some((
            u16::from_le_bytes([b[0], b[1]]) as usize,
            ColorId::from_bytes(&b[2..]),
        ))
    }
}

impl LocalityGraph for ProductGraph {
    fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    fn out_edges(&self, v: &VertexId) -> Result<Vec<Edge>> {
        let parts = self.components(v)?;
        let mut edges = Vec::new();
        for (l, g) in self.factors.iter().enumerate() {
            for fe in g.out_edges(&parts[l])? {
                let mut moved = parts.clone();
                moved[l] = fe.target;
                edges.push(Edge {
                    source: v.clone(),
                    target: Self::compose(&moved),
                    length: fe.length,
                    color: Self::lift_color(l, &fe.color),
                });
            }
        }
        Ok(edges)
    }

    fn level(&self, v: &VertexId) -> Result<usize> {
        let parts = self.components(v)?;
        self.factors
            .iter()
            .zip(&parts)
            .map(|(g, p)| g.level(p))
            .sum()
    }

    fn edge_with_color(&self, v: &VertexId, color: &ColorId) -> Result<Option<Edge>> {
        let Some((l, fc)) = Self::split_color(color) else {
            return Ok(None);
        };
        let Some(g) = self.factors.get(l) else {
            return Ok(None);
        };
        let mut parts = self.components(v)?;
        Ok(g.edge_with_color(&parts[l], &fc)?.map(|fe| {
            parts[l] = fe.target;
            Edge {
                source: v.clone(),
                target: Self::compose(&parts),
                length: fe.length,
                color: color.clone(),
            }
        }))
    }

    fn display_vertex(&self, v: &VertexId) -> String {
        match self.components(v) {
            Ok(parts) => {
                let inner: Vec<String> = self
                    .factors
                    .iter()
                    .zip(&parts)
                    .map(|(g, p)| g.display_vertex(p))
                    .collect();
                format!("<{}>", inner.join(","))
            }
            Err(_) => format!("{v:?}"),
        }
    }

    fn display_color(&self, c: &ColorId) -> String {
        match Self::split_color(c) {
            Some((l, fc)) if l < self.factors.len() => {
                format!("{l}/{}", self.factors[l].display_color(&fc))
            }
            _ => format!("{c:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CompleteGraph, Hypercube};
    use std::collections::BTreeSet;

    fn k2() -> Arc<dyn LocalityGraph> {
        Arc::new(CompleteGraph::new(2).unwrap())
    }

    #[test]
    fn two_k2_is_a_square() {
        let p = ProductGraph::new(vec![k2(), k2()]).unwrap();
        let cube = Hypercube::new(2).unwrap();
        // Map product tuple (a, b) to the bit string ab.
        let to_cube = |v: &VertexId| -> String {
            let parts = p.components(v).unwrap();
            parts
                .iter()
                .map(|x| if x.as_bytes()[0] == 1 { '1' } else { '0' })
                .collect()
        };
        let mut prod_edges = BTreeSet::new();
        let mut frontier = vec![p.root()];
        let mut seen = BTreeSet::new();
        while let Some(v) = frontier.pop() {
            if !seen.insert(v.clone()) {
                continue;
            }
            for e in p.out_edges(&v).unwrap() {
                prod_edges.insert((to_cube(&e.source), to_cube(&e.target)));
                frontier.push(e.target);
            }
        }
        let mut cube_edges = BTreeSet::new();
        for v in cube.all_vertices() {
            for e in cube.out_edges(&v).unwrap() {
                cube_edges.insert((
                    cube.display_vertex(&e.source),
                    cube.display_vertex(&e.target),
                ));
            }
        }
        assert_eq!(prod_edges, cube_edges);
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn levels_add_across_components() {
        let p = ProductGraph::new(vec![k2(), Arc::new(Hypercube::new(4).unwrap())]).unwrap();
        let cube = Hypercube::new(4).unwrap();
        let v2 = cube.parse("1101").unwrap();
        let v = ProductGraph::compose(&[CompleteGraph::new(2).unwrap().vertex(0), v2]);
        assert_eq!(p.level(&v).unwrap(), 3);
    }

    #[test]
    fn degree_bound_sums() {
        let p = ProductGraph::new(vec![k2(), k2(), k2()]).unwrap();
        assert_eq!(p.degree_bound(), 3);
        assert!(ProductGraph::new(vec![]).is_err());
    }

    #[test]
    fn colors_are_lifted_and_resolvable() {
        let p = ProductGraph::new(vec![k2(), k2()]).unwrap();
        let root = p.root();
        for e in p.out_edges(&root).unwrap() {
            assert_eq!(p.edge_with_color(&root, &e.color).unwrap(), Some(e));
        }
    }
}
