use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{ColorId, Edge, LocalityGraph, VertexId};
use crate::scalar::Scalar;

/// Values smaller than this in magnitude are stored as exact zeros, and an
/// entry whose biased and unbiased parts are both zero is dropped.
pub const ZERO_EPS: f64 = 1e-15;

/// Whether regrets are keyed by edge or pooled by edge color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LedgerMode {
    PerEdge,
    PerColor,
}

/// Accumulated regret for one key: `biased` has `b` subtracted per update,
/// `unbiased` does not.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Entry<S> {
    pub biased: S,
    pub unbiased: S,
}

/// Sparse regret accumulator. Absent keys are exactly zero.
#[derive(Clone, Debug)]
pub struct Ledger<S> {
    mode: LedgerMode,
    bias: S,
    steps: usize,
    edges: BTreeMap<VertexId, BTreeMap<VertexId, Entry<S>>>,
    colors: BTreeMap<ColorId, Entry<S>>,
}

impl<S: Scalar> Ledger<S> {
    pub fn new(mode: LedgerMode, bias: S) -> Result<Self> {
        if !(bias >= S::zero()) || !bias.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bias must be finite and >= 0, got {bias}"
            )));
        }
        Ok(Ledger {
            mode,
            bias,
            steps: 0,
            edges: BTreeMap::new(),
            colors: BTreeMap::new(),
        })
    }

    pub fn mode(&self) -> LedgerMode {
        self.mode
    }

    pub fn bias(&self) -> S {
        self.bias
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of stored (nonzero) keys.
    pub fn len(&self) -> usize {
        match self.mode {
            LedgerMode::PerEdge => self.edges.values().map(BTreeMap::len).sum(),
            LedgerMode::PerColor => self.colors.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of keys with nonzero unbiased regret.
    pub fn nonzero_unbiased(&self) -> usize {
        self.entries().filter(|e| e.unbiased != S::zero()).count()
    }

    fn entries(&self) -> Box<dyn Iterator<Item = &Entry<S>> + '_> {
        match self.mode {
            LedgerMode::PerEdge => Box::new(self.edges.values().flat_map(BTreeMap::values)),
            LedgerMode::PerColor => Box::new(self.colors.values()),
        }
    }

    pub fn edge(&self, source: &VertexId, target: &VertexId) -> Entry<S> {
        self.edges
            .get(source)
            .and_then(|m| m.get(target))
            .copied()
            .unwrap_or_default()
    }

    pub fn color(&self, c: &ColorId) -> Entry<S> {
        self.colors.get(c).copied().unwrap_or_default()
    }

    /// Per-edge entries grouped by source, in canonical order.
    pub fn edge_entries(&self) -> &BTreeMap<VertexId, BTreeMap<VertexId, Entry<S>>> {
        &self.edges
    }

    pub fn color_entries(&self) -> &BTreeMap<ColorId, Entry<S>> {
        &self.colors
    }

    /// `M`: the largest positive biased regret over all keys (0 if none).
    pub fn max_positive(&self) -> S {
        self.entries()
            .map(|e| e.biased.pos())
            .fold(S::zero(), S::max)
    }

    /// Positive biased regret of the key governing edge `e`.
    pub fn rate(&self, e: &Edge) -> S {
        match self.mode {
            LedgerMode::PerEdge => self.edge(&e.source, &e.target).biased.pos(),
            LedgerMode::PerColor => self.color(&e.color).biased.pos(),
        }
    }

    /// Out-edges of `v` carrying positive biased regret, as `(target, rate)`.
    ///
    /// In per-color mode with fewer positive colors than the degree bound, the
    /// colors are resolved through `edge_with_color` instead of enumerating
    /// every out-edge.
    pub fn positive_out<G: LocalityGraph + ?Sized>(
        &self,
        graph: &G,
        v: &VertexId,
    ) -> Result<Vec<(VertexId, S)>> {
        match self.mode {
            LedgerMode::PerEdge => Ok(self
                .edges
                .get(v)
                .map(|m| {
                    m.iter()
                        .filter(|(_, e)| e.biased > S::zero())
                        .map(|(t, e)| (t.clone(), e.biased))
                        .collect()
                })
                .unwrap_or_default()),
            LedgerMode::PerColor => {
                let positive: Vec<(&ColorId, S)> = self
                    .colors
                    .iter()
                    .filter(|(_, e)| e.biased > S::zero())
                    .map(|(c, e)| (c, e.biased))
                    .collect();
                let mut out = Vec::new();
                if (positive.len() as u64) < graph.degree_bound() {
                    for (c, r) in positive {
                        if let Some(e) = graph.edge_with_color(v, c)? {
                            out.push((e.target, r));
                        }
                    }
                } else {
                    for e in graph.out_edges(v)? {
                        let r = self.color(&e.color).biased;
                        if r > S::zero() {
                            out.push((e.target, r));
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Total positive biased regret leaving `v`.
    pub fn outflow<G: LocalityGraph + ?Sized>(&self, graph: &G, v: &VertexId) -> Result<S> {
        Ok(self
            .positive_out(graph, v)?
            .into_iter()
            .map(|(_, r)| r)
            .sum())
    }

    /// Records one step: `chosen` was played with utility `u_chosen`, and
    /// `neighbors` holds each out-edge of `chosen` with its target's utility.
    pub fn apply(&mut self, chosen: &VertexId, u_chosen: S, neighbors: &[(Edge, S)]) -> Result<()> {
        let bias = self.bias;
        match self.mode {
            LedgerMode::PerEdge => {
                let row = self.edges.entry(chosen.clone()).or_default();
                for (e, u) in neighbors {
                    let gain = *u - u_chosen;
                    let entry = row.entry(e.target.clone()).or_default();
                    bump(entry, gain, bias);
                    if is_zero(entry) {
                        row.remove(&e.target);
                    }
                }
                if row.is_empty() {
                    self.edges.remove(chosen);
                }
            }
            LedgerMode::PerColor => {
                for (i, (e, _)) in neighbors.iter().enumerate() {
                    if neighbors[..i].iter().any(|(o, _)| o.color == e.color) {
                        return Err(Error::ColoringViolation {
                            vertex: chosen.clone(),
                            color: format!("{:?}", e.color),
                        });
                    }
                }
                for (e, u) in neighbors {
                    let gain = *u - u_chosen;
                    let entry = self.colors.entry(e.color.clone()).or_default();
                    bump(entry, gain, bias);
                    if is_zero(entry) {
                        self.colors.remove(&e.color);
                    }
                }
            }
        }
        self.steps += 1;
        Ok(())
    }

    /// Per-edge update from a utility oracle.
    pub fn update_swap<G, F>(&mut self, graph: &G, chosen: &VertexId, utility: F) -> Result<()>
    where
        G: LocalityGraph + ?Sized,
        F: FnMut(&VertexId) -> Result<S>,
    {
        if self.mode != LedgerMode::PerEdge {
            return Err(Error::Unsupported(
                "update_swap on a per-color ledger".into(),
            ));
        }
        self.update_with(graph, chosen, utility)
    }

    /// Per-color update from a utility oracle.
    pub fn update_color<G, F>(&mut self, graph: &G, chosen: &VertexId, utility: F) -> Result<()>
    where
        G: LocalityGraph + ?Sized,
        F: FnMut(&VertexId) -> Result<S>,
    {
        if self.mode != LedgerMode::PerColor {
            return Err(Error::Unsupported(
                "update_color on a per-edge ledger".into(),
            ));
        }
        self.update_with(graph, chosen, utility)
    }

    fn update_with<G, F>(&mut self, graph: &G, chosen: &VertexId, mut utility: F) -> Result<()>
    where
        G: LocalityGraph + ?Sized,
        F: FnMut(&VertexId) -> Result<S>,
    {
        let u_chosen = utility(chosen)?;
        let neighbors = graph
            .out_edges(chosen)?
            .into_iter()
            .map(|e| {
                let u = utility(&e.target).map_err(|err| Error::Oracle {
                    vertex: e.target.clone(),
                    reason: err.to_string(),
                })?;
                Ok((e, u))
            })
            .collect::<Result<Vec<_>>>()?;
        self.apply(chosen, u_chosen, &neighbors)
    }

    /// Inserts a raw entry. Intended for tests and oracles that build ledgers by hand.
    pub fn set_edge(&mut self, source: VertexId, target: VertexId, entry: Entry<S>) {
        let row = self.edges.entry(source.clone()).or_default();
        if is_zero(&entry) {
            row.remove(&target);
            if row.is_empty() {
                self.edges.remove(&source);
            }
        } else {
            row.insert(target, entry);
        }
    }

    pub fn set_color(&mut self, color: ColorId, entry: Entry<S>) {
        if is_zero(&entry) {
            self.colors.remove(&color);
        } else {
            self.colors.insert(color, entry);
        }
    }
}

fn bump<S: Scalar>(entry: &mut Entry<S>, gain: S, bias: S) {
    entry.biased += gain - bias;
    entry.unbiased += gain;
    let eps = S::of(ZERO_EPS);
    if entry.biased.abs() < eps {
        entry.biased = S::zero();
    }
    if entry.unbiased.abs() < eps {
        entry.unbiased = S::zero();
    }
}

fn is_zero<S: Scalar>(e: &Entry<S>) -> bool {
    e.biased == S::zero() && e.unbiased == S::zero()
}

/// Convenience constructor for hand-built entries with no bias.
pub fn entry<S: Scalar>(value: S) -> Entry<S> {
    Entry {
        biased: value,
        unbiased: value,
    }
}
