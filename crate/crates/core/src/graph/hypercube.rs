use super::{unit_length, ColorId, Edge, GraphMeta, LocalityGraph, VertexId};
use crate::error::{Error, Result};

/// The `n`-dimensional hypercube over `{0,1}^n`: an edge flips exactly one
/// coordinate, every edge has unit length, and the edge that sets variable
/// `i` to value `x` has color `(i, x)`, giving `2n` colors in total.
///
/// Vertices are packed little-endian bit strings of `ceil(n/8)` bytes;
/// variable `i` lives in bit `i % 8` of byte `i / 8`. The root is all zeros.
#[derive(Clone, Debug)]
pub struct Hypercube {
    n: usize,
    meta: GraphMeta,
}

/// Decoded hypercube color: the variable an edge sets, and the value it sets it to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HypercubeColor {
    pub var: usize,
    pub value: bool,
}

impl HypercubeColor {
    pub fn encode(self) -> ColorId {
        let mut bytes = (self.var as u32).to_le_bytes().to_vec();
        bytes.push(self.value as u8);
        ColorId::from_vec(bytes)
    }

    pub fn decode(c: &ColorId) -> Option<Self> {
        let b = c.as_bytes();
        if b.len() != 5 || b[4] > 1 {
            return None;
        }
        let var = u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize;
        Some(HypercubeColor {
            var,
            value: b[4] == 1,
        })
    }
}

impl Hypercube {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "hypercube dimension must be at least 1".into(),
            ));
        }
        let root = VertexId::from_vec(vec![0u8; n.div_ceil(8)]);
        Ok(Hypercube {
            n,
            meta: GraphMeta {
                degree_bound: n as u64,
                utility_span: 1.0,
                root,
            },
        })
    }

    pub fn with_utility_span(mut self, span: f64) -> Self {
        self.meta.utility_span = span;
        self
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn vertex(&self, bits: &[bool]) -> Result<VertexId> {
        if bits.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "expected {} bits, got {}",
                self.n,
                bits.len()
            )));
        }
        Ok(pack_bits(bits))
    }

    /// Parses a `0`/`1` string, variable 0 first.
    pub fn parse(&self, s: &str) -> Result<VertexId> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "bad bit character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        self.vertex(&bits)
    }

    pub fn bits(&self, v: &VertexId) -> Result<Vec<bool>> {
        self.check(v)?;
        Ok((0..self.n).map(|i| get_bit(v, i)).collect())
    }

    pub fn bit(&self, v: &VertexId, i: usize) -> Result<bool> {
        self.check(v)?;
        Ok(get_bit(v, i))
    }

    /// All `2^n` vertices in increasing numeric order. Verification scale only.
    pub fn all_vertices(&self) -> Vec<VertexId> {
        assert!(self.n < 24, "refusing to enumerate a {}-cube", self.n);
        (0u64..(1u64 << self.n))
            .map(|mask| {
                let bits: Vec<bool> = (0..self.n).map(|i| mask >> i & 1 == 1).collect();
                pack_bits(&bits)
            })
            .collect()
    }

    pub fn all_colors(&self) -> Vec<ColorId> {
        (0..self.n)
            .flat_map(|var| {
                [false, true]
                    .into_iter()
                    .map(move |value| HypercubeColor { var, value }.encode())
            })
            .collect()
    }

    fn check(&self, v: &VertexId) -> Result<()> {
        let bytes = v.as_bytes();
        if bytes.len() != self.n.div_ceil(8) {
            return Err(Error::Decode {
                vertex: v.clone(),
                reason: format!(
                    "expected {} bytes for a {}-cube",
                    self.n.div_ceil(8),
                    self.n
                ),
            });
        }
        let spare = bytes.len() * 8 - self.n;
        if spare > 0 {
            let last = bytes[bytes.len() - 1];
            if last >> (8 - spare) != 0 {
                return Err(Error::Decode {
                    vertex: v.clone(),
                    reason: "padding bits set".into(),
                });
            }
        }
        Ok(())
    }

    fn flip_edge(&self, v: &VertexId, var: usize) -> Edge {
        let value = !get_bit(v, var);
        let mut bytes = v.as_bytes().to_vec();
        bytes[var / 8] ^= 1 << (var % 8);
        Edge {
            source: v.clone(),
            target: VertexId::from_vec(bytes),
            length: unit_length(),
            color: HypercubeColor { var, value }.encode(),
        }
    }
}

/// Hypercube vertex with bit `i` set iff `bits[i]`, little-endian within bytes.
pub fn pack_bits(bits: &[bool]) -> VertexId {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    VertexId::from_vec(bytes)
}

pub fn get_bit(v: &VertexId, i: usize) -> bool {
    v.as_bytes()[i / 8] >> (i % 8) & 1 == 1
}

impl LocalityGraph for Hypercube {
    fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    fn out_edges(&self, v: &VertexId) -> Result<Vec<Edge>> {
        self.check(v)?;
        Ok((0..self.n).map(|i| self.flip_edge(v, i)).collect())
    }

    fn level(&self, v: &VertexId) -> Result<usize> {
        self.check(v)?;
        Ok(v.as_bytes().iter().map(|b| b.count_ones() as usize).sum())
    }

    fn edge_with_color(&self, v: &VertexId, color: &ColorId) -> Result<Option<Edge>> {
        self.check(v)?;
        match HypercubeColor::decode(color) {
            Some(c) if c.var < self.n && get_bit(v, c.var) != c.value => {
                Ok(Some(self.flip_edge(v, c.var)))
            }
            _ => Ok(None),
        }
    }

    fn display_vertex(&self, v: &VertexId) -> String {
        if self.check(v).is_err() {
            return format!("{v:?}");
        }
        (0..self.n)
            .map(|i| if get_bit(v, i) { '1' } else { '0' })
            .collect()
    }

    fn display_color(&self, c: &ColorId) -> String {
        match HypercubeColor::decode(c) {
            Some(HypercubeColor { var, value }) => {
                format!("var{var}:{}", if value { "on" } else { "off" })
            }
            None => format!("{c:?}"),
        }
    }

    fn hypercube_dimension(&self) -> Option<usize> {
        Some(self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::check_vertex_contract;
    use std::collections::BTreeSet;

    #[test]
    fn three_cube_root_neighbors() {
        let g = Hypercube::new(3).unwrap();
        let root = g.parse("000").unwrap();
        assert_eq!(root, g.root());
        let targets: BTreeSet<String> = g
            .out_edges(&root)
            .unwrap()
            .iter()
            .inspect(|e| assert_eq!(e.length, unit_length()))
            .map(|e| g.display_vertex(&e.target))
            .collect();
        let expected: BTreeSet<String> = ["100", "010", "001"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(targets, expected);
    }

    #[test]
    fn one_cube_single_edge_color() {
        let g = Hypercube::new(1).unwrap();
        let edges = g.out_edges(&g.parse("0").unwrap()).unwrap();
        assert_eq!(edges.len(), 1);
        assert_eq!(g.display_vertex(&edges[0].target), "1");
        assert_eq!(g.display_color(&edges[0].color), "var0:on");
    }

    #[test]
    fn counts_for_three_cube() {
        let g = Hypercube::new(3).unwrap();
        let vs = g.all_vertices();
        assert_eq!(vs.len(), 8);
        let mut edges = 0;
        let mut colors = BTreeSet::new();
        for v in &vs {
            assert_eq!(check_vertex_contract(&g, v).unwrap(), None);
            for e in g.out_edges(v).unwrap() {
                edges += 1;
                colors.insert(e.color);
            }
        }
        assert_eq!(edges, 24);
        assert_eq!(colors.len(), 6);
        assert_eq!(g.all_colors().len(), 6);
    }

    #[test]
    fn edge_color_rule() {
        let g = Hypercube::new(3).unwrap();
        let src = g.parse("010").unwrap();
        let dst = g.parse("011").unwrap();
        let e = g
            .out_edges(&src)
            .unwrap()
            .into_iter()
            .find(|e| e.target == dst)
            .unwrap();
        assert_eq!(g.display_color(&e.color), "var2:on");
        assert_eq!(g.edge_with_color(&src, &e.color).unwrap(), Some(e));
        let off2 = HypercubeColor {
            var: 2,
            value: false,
        }
        .encode();
        assert_eq!(g.edge_with_color(&src, &off2).unwrap(), None);
    }

    #[test]
    fn level_is_hamming_weight() {
        let g = Hypercube::new(3).unwrap();
        assert_eq!(g.level(&g.parse("011").unwrap()).unwrap(), 2);
        assert_eq!(g.level(&g.root()).unwrap(), 0);
        let big = Hypercube::new(20).unwrap();
        let mut bits = vec![false; 20];
        bits[3] = true;
        bits[19] = true;
        assert_eq!(big.level(&big.vertex(&bits).unwrap()).unwrap(), 2);
    }

    #[test]
    fn rejects_zero_dimension_and_bad_encodings() {
        assert!(matches!(Hypercube::new(0), Err(Error::InvalidParameter(_))));
        let g = Hypercube::new(3).unwrap();
        assert!(matches!(
            g.out_edges(&VertexId::from_bytes(&[0, 0])),
            Err(Error::Decode { .. })
        ));
        assert!(matches!(
            g.level(&VertexId::from_bytes(&[0xff])),
            Err(Error::Decode { .. })
        ));
    }
}
