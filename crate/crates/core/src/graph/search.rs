//! Bounded search over locality graphs: weighted distances, shortest-path
//! edge membership, and full materialization of small graphs.
//!
//! Everything here is for verification-scale graphs. Each entry point takes
//! an explicit horizon (a cap on settled or discovered vertices) and reports
//! [`Error::HorizonExhausted`] rather than running unbounded.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use super::{Edge, Length, LocalityGraph, VertexId};
use crate::error::{Error, Result};

/// Weighted distance `d(a, b)` by uniform-cost search, settling at most
/// `horizon` vertices. `Ok(None)` means the reachable set was exhausted
/// without meeting `b`. Ties pop in canonical vertex order.
pub fn shortest_distance<G: LocalityGraph + ?Sized>(
    graph: &G,
    a: &VertexId,
    b: &VertexId,
    horizon: usize,
) -> Result<Option<Length>> {
    let zero = Length::from_integer(0);
    if a == b {
        return Ok(Some(zero));
    }
    let mut best: BTreeMap<VertexId, Length> = BTreeMap::from([(a.clone(), zero)]);
    let mut heap = BinaryHeap::from([Reverse((zero, a.clone()))]);
    let mut settled = 0usize;
    while let Some(Reverse((d, v))) = heap.pop() {
        if best.get(&v).is_some_and(|&bd| bd < d) {
            continue;
        }
        if &v == b {
            return Ok(Some(d));
        }
        settled += 1;
        if settled > horizon {
            return Err(Error::HorizonExhausted { horizon });
        }
        for e in graph.out_edges(&v)? {
            let nd = d + e.length;
            if best.get(&e.target).is_none_or(|&old| nd < old) {
                best.insert(e.target.clone(), nd);
                heap.push(Reverse((nd, e.target)));
            }
        }
    }
    Ok(None)
}

/// The candidates lying on some shortest path to `b`: edges `(i, j)` with
/// `d(i, b) = c(i, j) + d(j, b)`.
pub fn edges_toward<G: LocalityGraph + ?Sized>(
    graph: &G,
    b: &VertexId,
    candidates: &[Edge],
    horizon: usize,
) -> Result<Vec<Edge>> {
    let mut cache: BTreeMap<VertexId, Length> = BTreeMap::new();
    let mut dist = |x: &VertexId| -> Result<Length> {
        if let Some(d) = cache.get(x) {
            return Ok(*d);
        }
        let d = shortest_distance(graph, x, b, horizon)?
            .ok_or_else(|| Error::Unreachable(x.clone()))?;
        cache.insert(x.clone(), d);
        Ok(d)
    };
    let mut out = Vec::new();
    for e in candidates {
        if dist(&e.source)? == e.length + dist(&e.target)? {
            out.push(e.clone());
        }
    }
    Ok(out)
}

/// A fully enumerated graph: every vertex reachable from the root, indexed
/// in BFS discovery order (root is index 0).
#[derive(Clone, Debug)]
pub struct Materialized {
    pub vertices: Vec<VertexId>,
    pub index: BTreeMap<VertexId, usize>,
    /// Out-edges per vertex, paired with the target's index.
    pub out: Vec<Vec<(usize, Edge)>>,
    /// In-edges per vertex as `(source index, length)`.
    pub rev: Vec<Vec<(usize, Length)>>,
}

/// Enumerates the reachable part of `graph` by BFS from the root, failing
/// once more than `horizon` vertices have been discovered.
pub fn materialize<G: LocalityGraph + ?Sized>(graph: &G, horizon: usize) -> Result<Materialized> {
    let root = graph.root();
    let mut vertices = vec![root.clone()];
    let mut index = BTreeMap::from([(root, 0usize)]);
    let mut out: Vec<Vec<(usize, Edge)>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let mut list = Vec::new();
        for e in graph.out_edges(&vertices[i])? {
            let j = match index.get(&e.target) {
                Some(&j) => j,
                None => {
                    if vertices.len() >= horizon {
                        return Err(Error::HorizonExhausted { horizon });
                    }
                    let j = vertices.len();
                    vertices.push(e.target.clone());
                    index.insert(e.target.clone(), j);
                    queue.push_back(j);
                    j
                }
            };
            list.push((j, e));
        }
        if out.len() <= i {
            out.resize_with(i + 1, Vec::new);
        }
        out[i] = list;
    }
    out.resize_with(vertices.len(), Vec::new);
    let mut rev = vec![Vec::new(); vertices.len()];
    for (i, list) in out.iter().enumerate() {
        for (j, e) in list {
            rev[*j].push((i, e.length));
        }
    }
    Ok(Materialized {
        vertices,
        index,
        out,
        rev,
    })
}

impl Materialized {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Unweighted BFS distance from the root.
    pub fn bfs_levels(&self) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.len()];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for (j, _) in &self.out[i] {
                if level[*j] == usize::MAX {
                    level[*j] = level[i] + 1;
                    queue.push_back(*j);
                }
            }
        }
        level
    }

    /// `d(x, b)` for every vertex `x`, by Dijkstra on reversed edges.
    pub fn distances_to(&self, b: usize) -> Vec<Option<Length>> {
        self.dijkstra(b, |i| self.rev[i].iter().copied())
    }

    /// `d(a, x)` for every vertex `x`.
    pub fn distances_from(&self, a: usize) -> Vec<Option<Length>> {
        self.dijkstra(a, |i| self.out[i].iter().map(|(j, e)| (*j, e.length)))
    }

    fn dijkstra<'a, I, F>(&'a self, start: usize, next: F) -> Vec<Option<Length>>
    where
        F: Fn(usize) -> I,
        I: Iterator<Item = (usize, Length)> + 'a,
    {
        let mut dist: Vec<Option<Length>> = vec![None; self.len()];
        dist[start] = Some(Length::from_integer(0));
        let mut heap = BinaryHeap::from([Reverse((Length::from_integer(0), start))]);
        while let Some(Reverse((d, i))) = heap.pop() {
            if dist[i].is_some_and(|bd| bd < d) {
                continue;
            }
            for (j, len) in next(i) {
                let nd = d + len;
                if dist[j].is_none_or(|old| nd < old) {
                    dist[j] = Some(nd);
                    heap.push(Reverse((nd, j)));
                }
            }
        }
        dist
    }

    /// Whether edge `(i, j)` of length `len` is on a shortest path, given the
    /// distances to the target from [`Materialized::distances_to`].
    pub fn on_shortest_path(dist_to_b: &[Option<Length>], i: usize, j: usize, len: Length) -> bool {
        match (dist_to_b[i], dist_to_b[j]) {
            (Some(di), Some(dj)) => di == len + dj,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CompleteGraph, ExplicitGraph, Hypercube};

    #[test]
    fn hypercube_distances_are_hamming() {
        let g = Hypercube::new(3).unwrap();
        let a = g.parse("000").unwrap();
        let b = g.parse("111").unwrap();
        assert_eq!(
            shortest_distance(&g, &a, &b, 100).unwrap(),
            Some(Length::from_integer(3))
        );
        assert_eq!(
            shortest_distance(&g, &a, &a, 0).unwrap(),
            Some(Length::from_integer(0))
        );
    }

    #[test]
    fn unreachable_vs_horizon() {
        let g = ExplicitGraph::unit(3, &[(0, 1)]).unwrap();
        assert_eq!(
            shortest_distance(&g, &g.vertex(0), &g.vertex(2), 10).unwrap(),
            None
        );
        let cube = Hypercube::new(10).unwrap();
        let far = cube.parse("1111111111").unwrap();
        assert!(matches!(
            shortest_distance(&cube, &cube.root(), &far, 5),
            Err(Error::HorizonExhausted { horizon: 5 })
        ));
    }

    #[test]
    fn edges_toward_on_square() {
        let g = Hypercube::new(2).unwrap();
        let b = g.parse("11").unwrap();
        let all: Vec<Edge> = g
            .all_vertices()
            .iter()
            .flat_map(|v| g.out_edges(v).unwrap())
            .collect();
        assert_eq!(all.len(), 8);
        let toward = edges_toward(&g, &b, &all, 100).unwrap();
        assert_eq!(toward.len(), 4);
        for e in toward {
            let flipped_to_one =
                (0..2).any(|i| !g.bit(&e.source, i).unwrap() && g.bit(&e.target, i).unwrap());
            assert!(flipped_to_one);
        }
    }

    #[test]
    fn one_step_and_away_edges() {
        let k = CompleteGraph::new(3).unwrap();
        let e = k.out_edges(&k.vertex(0)).unwrap().remove(0);
        let t = e.target.clone();
        assert_eq!(edges_toward(&k, &t, &[e.clone()], 10).unwrap(), vec![e]);

        let path = ExplicitGraph::unit(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]).unwrap();
        let away = path
            .out_edges(&path.vertex(1))
            .unwrap()
            .into_iter()
            .find(|e| e.target == path.vertex(2))
            .unwrap();
        assert!(edges_toward(&path, &path.vertex(0), &[away], 10)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn materialize_matches_levels() {
        let g = ExplicitGraph::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let m = materialize(&g, 10).unwrap();
        let levels = m.bfs_levels();
        for (i, v) in m.vertices.iter().enumerate() {
            assert_eq!(levels[i], g.level(v).unwrap());
        }
        assert_eq!(levels[m.index[&g.vertex(2)]], 2);
        assert!(materialize(&Hypercube::new(6).unwrap(), 10).is_err());
    }
}
