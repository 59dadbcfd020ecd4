//! Regret measurements over unbiased ledger values.

use std::collections::BTreeMap;

use super::ledger::{Ledger, LedgerMode};
use crate::error::{Error, Result};
use crate::graph::search::{materialize, Materialized};
use crate::graph::{ColorId, HypercubeColor, LocalityGraph, VertexId};
use crate::scalar::Scalar;

fn require<S>(ledger: &Ledger<S>, mode: LedgerMode, what: &str) -> Result<()>
where
    S: Scalar,
{
    if ledger.mode() != mode {
        return Err(Error::Unsupported(format!(
            "{what} needs a {mode:?} ledger"
        )));
    }
    Ok(())
}

/// Sum over sources of the largest positive outgoing regret.
pub fn local_swap<S: Scalar>(ledger: &Ledger<S>) -> Result<S> {
    require(ledger, LedgerMode::PerEdge, "local swap regret")?;
    Ok(ledger
        .edge_entries()
        .values()
        .map(|row| row.values().map(|e| e.unbiased).fold(S::zero(), S::max))
        .sum())
}

/// Largest positive regret over all keys.
pub fn local_internal<S: Scalar>(ledger: &Ledger<S>) -> S {
    let vals: Box<dyn Iterator<Item = S>> = match ledger.mode() {
        LedgerMode::PerEdge => Box::new(
            ledger
                .edge_entries()
                .values()
                .flat_map(|r| r.values().map(|e| e.unbiased)),
        ),
        LedgerMode::PerColor => Box::new(ledger.color_entries().values().map(|e| e.unbiased)),
    };
    vals.fold(S::zero(), S::max)
}

/// Sum over colors of the positive part of the color's total.
pub fn local_color<S: Scalar>(ledger: &Ledger<S>) -> Result<S> {
    require(ledger, LedgerMode::PerColor, "local colored regret")?;
    Ok(ledger
        .color_entries()
        .values()
        .map(|e| e.unbiased.pos())
        .sum())
}

/// Colored regret of a per-edge ledger, grouping its edges by their color in `graph`.
pub fn local_color_from_edges<S, G>(ledger: &Ledger<S>, graph: &G) -> Result<S>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    Ok(color_totals(ledger, graph)?.values().map(|v| v.pos()).sum())
}

/// Per-color totals of a per-edge ledger.
pub fn color_totals<S, G>(ledger: &Ledger<S>, graph: &G) -> Result<BTreeMap<ColorId, S>>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    require(ledger, LedgerMode::PerEdge, "color regrouping")?;
    let mut totals: BTreeMap<ColorId, S> = BTreeMap::new();
    for (source, row) in ledger.edge_entries() {
        let edges = graph.out_edges(source)?;
        for (target, e) in row {
            let edge = edges.iter().find(|x| &x.target == target).ok_or_else(|| {
                Error::InvalidParameter(format!("ledger key {source:?}->{target:?} is not an edge"))
            })?;
            *totals.entry(edge.color.clone()).or_insert_with(S::zero) += e.unbiased;
        }
    }
    Ok(totals)
}

/// Local external regret on the `n`-cube from a per-color ledger.
///
/// The edges on shortest paths to `b` are exactly those setting some bit to
/// `b`'s value, so the per-target sum is `Σ_v R(v, b_v)`, maximized bitwise.
pub fn local_external_hypercube<S: Scalar>(ledger: &Ledger<S>, n: usize) -> Result<S> {
    require(
        ledger,
        LedgerMode::PerColor,
        "hypercube local external regret",
    )?;
    let total: S = (0..n)
        .map(|var| {
            let on = ledger
                .color(&HypercubeColor { var, value: true }.encode())
                .unbiased;
            let off = ledger
                .color(&HypercubeColor { var, value: false }.encode())
                .unbiased;
            on.max(off)
        })
        .sum();
    Ok(total.pos() / S::of_usize(n))
}

/// Local external regret of a per-edge ledger by brute force over every
/// vertex of a materializable graph. Returns the value and a maximizing target.
pub fn local_external_exhaustive<S, G>(
    ledger: &Ledger<S>,
    graph: &G,
    horizon: usize,
) -> Result<(S, Option<VertexId>)>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    let m = materialize(graph, horizon)?;
    local_external_materialized(ledger, &m, graph.degree_bound())
}

pub fn local_external_materialized<S: Scalar>(
    ledger: &Ledger<S>,
    m: &Materialized,
    degree_bound: u64,
) -> Result<(S, Option<VertexId>)> {
    require(ledger, LedgerMode::PerEdge, "local external regret")?;
    let d = S::of(degree_bound as f64);
    let mut best = S::zero();
    let mut arg = None;
    for b in 0..m.len() {
        let dist = m.distances_to(b);
        let mut sum = S::zero();
        for (source, row) in ledger.edge_entries() {
            let Some(&i) = m.index.get(source) else {
                continue;
            };
            for (target, e) in row {
                let Some(&j) = m.index.get(target) else {
                    continue;
                };
                let len = m.out[i]
                    .iter()
                    .find(|(t, _)| *t == j)
                    .map(|(_, edge)| edge.length)
                    .ok_or_else(|| Error::InvalidParameter("ledger key is not an edge".into()))?;
                if Materialized::on_shortest_path(&dist, i, j, len) {
                    sum += e.unbiased;
                }
            }
        }
        let val = (sum / d).pos();
        if val > best {
            best = val;
            arg = Some(m.vertices[b].clone());
        }
    }
    Ok((best, arg))
}

/// Global regret on a complete graph where every ordered pair is an edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlobalRegret<S> {
    pub internal: S,
    pub swap: S,
    pub external: S,
}

/// Global internal, swap and external regret over `actions`.
pub fn global<S: Scalar>(ledger: &Ledger<S>, actions: &[VertexId]) -> Result<GlobalRegret<S>> {
    require(ledger, LedgerMode::PerEdge, "global regret")?;
    let internal = local_internal(ledger);
    let swap = local_swap(ledger)?;
    let mut external = S::zero();
    for b in actions {
        let col: S = ledger
            .edge_entries()
            .iter()
            .filter(|(a, _)| *a != b)
            .map(|(_, row)| row.get(b).map(|e| e.unbiased).unwrap_or_else(S::zero))
            .sum();
        external = external.max(col);
    }
    Ok(GlobalRegret {
        internal,
        swap,
        external,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CompleteGraph, Hypercube};
    use crate::regret::ledger::entry;

    fn v(b: u8) -> VertexId {
        VertexId::from_bytes(&[b])
    }

    #[test]
    fn local_swap_examples() {
        let mut l = Ledger::<f64>::new(LedgerMode::PerEdge, 0.0).unwrap();
        assert_eq!(local_swap(&l).unwrap(), 0.0);
        l.set_edge(v(0), v(1), entry(-2.0));
        assert_eq!(local_swap(&l).unwrap(), 0.0);
        l.set_edge(v(0), v(1), entry(3.0));
        l.set_edge(v(0), v(2), entry(5.0));
        l.set_edge(v(3), v(4), entry(1.0));
        assert_eq!(local_swap(&l).unwrap(), 6.0);
    }

    #[test]
    fn local_color_examples() {
        let mut l = Ledger::<f64>::new(LedgerMode::PerColor, 0.0).unwrap();
        assert_eq!(local_color(&l).unwrap(), 0.0);
        l.set_color(ColorId::from_bytes(&[0]), entry(-1.0));
        l.set_color(ColorId::from_bytes(&[1]), entry(2.0));
        assert_eq!(local_color(&l).unwrap(), 2.0);
    }

    #[test]
    fn hypercube_external_closed_form() {
        let mut l = Ledger::<f64>::new(LedgerMode::PerColor, 0.0).unwrap();
        l.set_color(
            HypercubeColor {
                var: 0,
                value: true,
            }
            .encode(),
            entry(2.0),
        );
        l.set_color(
            HypercubeColor {
                var: 0,
                value: false,
            }
            .encode(),
            entry(-1.0),
        );
        assert_eq!(local_external_hypercube(&l, 2).unwrap(), 1.0);

        let mut neg = Ledger::<f64>::new(LedgerMode::PerColor, 0.0).unwrap();
        for c in Hypercube::new(2).unwrap().all_colors() {
            neg.set_color(c, entry(-1.0));
        }
        assert_eq!(local_external_hypercube(&neg, 2).unwrap(), 0.0);
    }

    #[test]
    fn hypercube_external_matches_brute_force() {
        // The same regrets laid out per edge: each color's total on one edge.
        let cube = Hypercube::new(2).unwrap();
        let mut per_edge = Ledger::<f64>::new(LedgerMode::PerEdge, 0.0).unwrap();
        per_edge.set_edge(
            cube.parse("00").unwrap(),
            cube.parse("10").unwrap(),
            entry(2.0),
        );
        per_edge.set_edge(
            cube.parse("10").unwrap(),
            cube.parse("00").unwrap(),
            entry(-1.0),
        );
        let (val, _) = local_external_exhaustive(&per_edge, &cube, 100).unwrap();
        assert_eq!(val, 1.0);
    }

    #[test]
    fn global_examples() {
        let k = CompleteGraph::new(3).unwrap();
        let acts = k.all_vertices();
        let mut l = Ledger::<f64>::new(LedgerMode::PerEdge, 0.0).unwrap();
        assert_eq!(
            global(&l, &acts).unwrap(),
            GlobalRegret {
                internal: 0.0,
                swap: 0.0,
                external: 0.0
            }
        );
        l.set_edge(acts[0].clone(), acts[1].clone(), entry(4.0));
        assert_eq!(
            global(&l, &acts).unwrap(),
            GlobalRegret {
                internal: 4.0,
                swap: 4.0,
                external: 4.0
            }
        );
    }

    #[test]
    fn complete_graph_external_is_global_over_d() {
        let k = CompleteGraph::new(4).unwrap();
        let acts = k.all_vertices();
        let mut l = Ledger::<f64>::new(LedgerMode::PerEdge, 0.0).unwrap();
        let vals = [
            1.0, -2.0, 0.5, 3.0, -1.0, 2.5, 0.25, 1.5, -0.5, 2.0, 1.0, -3.0,
        ];
        let mut it = vals.iter();
        for a in &acts {
            for b in &acts {
                if a != b {
                    l.set_edge(a.clone(), b.clone(), entry(*it.next().unwrap()));
                }
            }
        }
        let g = global(&l, &acts).unwrap();
        let (local, _) = local_external_exhaustive(&l, &k, 100).unwrap();
        assert!((local - g.external / 3.0).abs() < 1e-12);
    }
}
