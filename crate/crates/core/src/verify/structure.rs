use std::collections::BTreeMap;

use super::CheckReport;
use crate::error::{Error, Result};
use crate::graph::search::{materialize, Materialized};
use crate::graph::{ColorId, Edge, LocalityGraph, ProductGraph};
use crate::regret::{
    local_color_from_edges, local_external_materialized, Entry, Ledger, LedgerMode,
};
use crate::scalar::Scalar;

/// For every target and every color class, either all edges of the class lie
/// on a shortest path to the target or none does.
pub fn check_admissibility<G, F>(graph: &G, m: &Materialized, color_of: F) -> CheckReport
where
    G: LocalityGraph + ?Sized,
    F: Fn(&Edge) -> ColorId,
{
    const NAME: &str = "admissibility";
    let mut classes: BTreeMap<ColorId, Vec<(usize, usize, &Edge)>> = BTreeMap::new();
    for (i, list) in m.out.iter().enumerate() {
        for (j, e) in list {
            classes.entry(color_of(e)).or_default().push((i, *j, e));
        }
    }
    let mut report = CheckReport::campaign(NAME);
    for b in 0..m.len() {
        let dist = m.distances_to(b);
        for (color, edges) in &classes {
            let toward = |&(i, j, e): &(usize, usize, &Edge)| {
                Materialized::on_shortest_path(&dist, i, j, e.length)
            };
            let first = toward(&edges[0]);
            let case = match edges.iter().find(|x| toward(x) != first) {
                None => CheckReport::pass(NAME, 0.0),
                Some(&(i, j, _)) => {
                    let (fi, fj, _) = edges[0];
                    CheckReport::fail(
                        NAME,
                        1.0,
                        format!(
                            "target {}: color {} has {}->{} {} a shortest path but {}->{} {}",
                            graph.display_vertex(&m.vertices[b]),
                            graph.display_color(color),
                            graph.display_vertex(&m.vertices[fi]),
                            graph.display_vertex(&m.vertices[fj]),
                            if first { "on" } else { "off" },
                            graph.display_vertex(&m.vertices[i]),
                            graph.display_vertex(&m.vertices[j]),
                            if first { "off" } else { "on" },
                        ),
                    )
                }
            };
            report.absorb(case);
        }
    }
    report
}

/// [`check_admissibility`] for the graph's own coloring over its whole
/// reachable vertex set.
pub fn check_graph_admissibility<G: LocalityGraph + ?Sized>(
    graph: &G,
    horizon: usize,
) -> Result<CheckReport> {
    let m = materialize(graph, horizon)?;
    Ok(check_admissibility(graph, &m, |e| e.color.clone()))
}

/// Per-factor unbiased ledgers of a per-edge product ledger. A product edge
/// changes exactly one component `l`, and its regret is credited to the
/// factor edge it moves along, so factor regret is regret under `u_l` with the
/// other components held at the played action.
pub fn factor_ledgers<S: Scalar>(
    product: &ProductGraph,
    ledger: &Ledger<S>,
) -> Result<Vec<Ledger<S>>> {
    if ledger.mode() != LedgerMode::PerEdge {
        return Err(Error::Unsupported(
            "factor ledgers need a per-edge ledger".into(),
        ));
    }
    let k = product.factors().len();
    let mut acc: Vec<BTreeMap<(_, _), S>> = vec![BTreeMap::new(); k];
    for (a, row) in ledger.edge_entries() {
        let pa = product.components(a)?;
        for (b, e) in row {
            let pb = product.components(b)?;
            let changed: Vec<usize> = (0..k).filter(|&l| pa[l] != pb[l]).collect();
            let [l] = changed[..] else {
                return Err(Error::InvalidParameter(format!(
                    "ledger key changes {} components",
                    changed.len()
                )));
            };
            *acc[l]
                .entry((pa[l].clone(), pb[l].clone()))
                .or_insert_with(S::zero) += e.unbiased;
        }
    }
    acc.into_iter()
        .map(|m| {
            let mut out = Ledger::new(LedgerMode::PerEdge, S::zero())?;
            for ((s, t), v) in m {
                out.set_edge(
                    s,
                    t,
                    Entry {
                        biased: v,
                        unbiased: v,
                    },
                );
            }
            Ok(out)
        })
        .collect()
}

fn slack(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

/// Local external regret of the product is at most the sum of the factors'
/// local external regrets.
pub fn check_product_theorem<S: Scalar>(
    product: &ProductGraph,
    ledger: &Ledger<S>,
    horizon: usize,
) -> Result<CheckReport> {
    let m = materialize(product, horizon)?;
    let (lhs, _) = local_external_materialized(ledger, &m, product.degree_bound())?;
    let lhs = lhs.to_f64_lossy();
    let mut rhs = 0.0;
    let mut parts = Vec::new();
    for (factor, fl) in product
        .factors()
        .iter()
        .zip(factor_ledgers(product, ledger)?)
    {
        let fm = materialize(factor.as_ref(), horizon)?;
        let (r, _) = local_external_materialized(&fl, &fm, factor.degree_bound())?;
        parts.push(r.to_f64_lossy());
        rhs += r.to_f64_lossy();
    }
    Ok(CheckReport::judge(
        "product-theorem",
        (lhs - rhs).max(0.0),
        slack(rhs),
        || format!("product regret {lhs:.6e} > sum of factor regrets {rhs:.6e} {parts:?}"),
    ))
}

/// Local external regret is at most colored regret over the degree bound.
pub fn check_color_dominance<S, G>(
    graph: &G,
    ledger: &Ledger<S>,
    horizon: usize,
) -> Result<CheckReport>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    let m = materialize(graph, horizon)?;
    let (lhs, arg) = local_external_materialized(ledger, &m, graph.degree_bound())?;
    let lhs = lhs.to_f64_lossy();
    let rhs = local_color_from_edges(ledger, graph)?.to_f64_lossy() / graph.degree_bound() as f64;
    Ok(CheckReport::judge(
        "color-dominance",
        (lhs - rhs).max(0.0),
        slack(rhs),
        || {
            let target = arg.map(|v| graph.display_vertex(&v)).unwrap_or_default();
            format!("external regret {lhs:.6e} toward {target} > colored regret / D {rhs:.6e}")
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::DecisionTreeGraph;
    use crate::graph::{CompleteGraph, Hypercube};
    use crate::regret::entry;
    use std::sync::Arc;

    #[test]
    fn hypercube_coloring_admissible() {
        for n in 1..=3 {
            let r = check_graph_admissibility(&Hypercube::new(n).unwrap(), 64).unwrap();
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn one_color_is_not_admissible() {
        let g = Hypercube::new(2).unwrap();
        let m = materialize(&g, 16).unwrap();
        let r = check_admissibility(&g, &m, |_| ColorId::from_vec(vec![0]));
        assert!(!r.passed && r.witness.is_some());
    }

    #[test]
    fn tree_edit_coloring_admissible() {
        let r = check_graph_admissibility(&DecisionTreeGraph::new(2).unwrap(), 100).unwrap();
        assert!(r.passed, "{r}");
    }

    #[test]
    fn single_factor_product_is_equality() {
        let k3: Arc<dyn LocalityGraph> = Arc::new(CompleteGraph::new(3).unwrap());
        let p = ProductGraph::new(vec![k3.clone()]).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        let v = |i: usize| ProductGraph::compose(&[CompleteGraph::new(3).unwrap().vertex(i)]);
        l.set_edge(v(0), v(1), entry(2.0));
        l.set_edge(v(2), v(1), entry(1.0));
        let r = check_product_theorem(&p, &l, 64).unwrap();
        assert!(r.passed && r.worst_residual == 0.0);
        let zero = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        assert!(check_product_theorem(&p, &zero, 64).unwrap().passed);
    }

    #[test]
    fn complete_graph_color_dominance() {
        let g = CompleteGraph::new(4).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        l.set_edge(g.vertex(0), g.vertex(1), entry(3.0));
        l.set_edge(g.vertex(2), g.vertex(1), entry(-1.0));
        l.set_edge(g.vertex(3), g.vertex(0), entry(0.5));
        let r = check_color_dominance(&g, &l, 64).unwrap();
        assert!(r.passed, "{r}");
    }
}
