use super::{unit_length, ColorId, Edge, GraphMeta, LocalityGraph, VertexId};
use crate::error::{Error, Result};

/// Complete directed graph with unit lengths on `k` actions, named `0..k`.
///
/// The edge `a -> b` is colored by its target `b`; since every vertex has at
/// most one edge into any target this coloring is injective per vertex, and
/// on a complete unit graph it is admissible.
#[derive(Clone, Debug)]
pub struct CompleteGraph {
    k: usize,
    names: Vec<String>,
    meta: GraphMeta,
}

impl CompleteGraph {
    pub fn new(k: usize) -> Result<Self> {
        Self::with_names((0..k).map(|i| i.to_string()).collect())
    }

    pub fn with_names(names: Vec<String>) -> Result<Self> {
        let k = names.len();
        if k == 0 || k > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "complete graph size {k} out of range"
            )));
        }
        Ok(CompleteGraph {
            k,
            names,
            meta: GraphMeta {
                degree_bound: (k - 1) as u64,
                utility_span: 1.0,
                root: Self::encode(0),
            },
        })
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn vertex(&self, index: usize) -> VertexId {
        assert!(index < self.k, "action {index} out of range");
        Self::encode(index)
    }

    pub fn all_vertices(&self) -> Vec<VertexId> {
        (0..self.k).map(Self::encode).collect()
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
        if i >= self.k {
            return Err(Error::Decode {
                vertex: v.clone(),
                reason: format!("action {i} out of range for K{}", self.k),
            });
        }
        Ok(i)
    }

    fn encode(i: usize) -> VertexId {
        VertexId::from_bytes(&(i as u16).to_le_bytes())
    }
}

impl LocalityGraph for CompleteGraph {
    fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    fn out_edges(&self, v: &VertexId) -> Result<Vec<Edge>> {
        let a = self.index(v)?;
        Ok((0..self.k)
            .filter(|&b| b != a)
            .map(|b| Edge {
                source: v.clone(),
                target: Self::encode(b),
                length: unit_length(),
                color: ColorId::from_bytes(&(b as u16).to_le_bytes()),
            })
            .collect())
    }

    fn level(&self, v: &VertexId) -> Result<usize> {
        Ok(usize::from(self.index(v)? != 0))
    }

    fn display_vertex(&self, v: &VertexId) -> String {
        match self.index(v) {
            Ok(i) => self.names[i].clone(),
            Err(_) => format!("{v:?}"),
        }
    }

    fn display_color(&self, c: &ColorId) -> String {
        let b = c.as_bytes();
        if b.len() == 2 {
            let i = u16::from_le_bytes([b[0], b[1]]) as usize;
            if let Some(name) = self.names.get(i) {
                return format!("to:{name}");
            }
        }
        format!("{c:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_actions() {
        let g = CompleteGraph::with_names(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let edges = g.out_edges(&g.vertex(0)).unwrap();
        let names: Vec<String> = edges.iter().map(|e| g.display_vertex(&e.target)).collect();
        assert_eq!(names, vec!["b", "c"]);
        assert!(edges.iter().all(|e| e.length == unit_length()));
        assert_eq!(g.degree_bound(), 2);
        assert_eq!(g.level(&g.vertex(0)).unwrap(), 0);
        assert_eq!(g.level(&g.vertex(2)).unwrap(), 1);
    }

    #[test]
    fn rejects_out_of_range() {
        let g = CompleteGraph::new(3).unwrap();
        assert!(g.out_edges(&VertexId::from_bytes(&[7, 0])).is_err());
        assert!(CompleteGraph::new(0).is_err());
    }
}
