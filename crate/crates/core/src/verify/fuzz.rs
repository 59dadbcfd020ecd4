use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::dense_reference;
use super::requirement::{
    blackwell_worst_case, check_blackwell, check_flow_lemmas, check_requirement2,
};
use super::structure::{
    check_admissibility, check_color_dominance, check_graph_admissibility, check_product_theorem,
};
use super::CheckReport;
use crate::dtree::{
    disagreement, edge_on_shortest_path, enumerate_trees, DecisionTree, DecisionTreeGraph, Edit,
};
use crate::error::Result;
use crate::graph::search::{materialize, shortest_distance, Materialized};
use crate::graph::{
    ColorId, CompleteGraph, ExplicitGraph, Hypercube, LevelCap, LocalityGraph, ProductGraph,
    VertexId,
};
use crate::regret::{
    compute_policy, entry, local_external_exhaustive, local_swap, stationary_distribution, Ledger,
    LedgerMode, PolicyParams,
};
use crate::tasks::{RandomUtilityTask, Task};

/// One seeded verification case: a small graph, a ledger on it and a level cap.
pub struct FuzzCase {
    pub seed: u64,
    pub graph: Box<dyn LocalityGraph>,
    pub ledger: Ledger<f64>,
    pub cap: LevelCap,
}

impl FuzzCase {
    pub fn params(&self) -> PolicyParams<f64> {
        PolicyParams::new(self.cap, self.ledger.bias())
    }
}

fn regret_value<R: Rng>(rng: &mut R) -> f64 {
    // Small integers make ties and exact cancellations common.
    if rng.random_bool(0.4) {
        rng.random_range(-1..=2) as f64
    } else {
        rng.random_range(-1.0..2.0)
    }
}

/// Every fifth case is a per-color ledger on a 2- or 3-cube; the rest are
/// per-edge ledgers on random graphs with up to 8 vertices, all reachable
/// from vertex 0.
pub fn fuzz_case(seed: u64) -> Result<FuzzCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = if rng.random_bool(0.25) {
        LevelCap::Unbounded
    } else {
        LevelCap::Bounded(rng.random_range(1..=3))
    };
    let bias = *[0.0, 0.25, 0.5].choose(&mut rng).expect("nonempty");
    let density = rng.random_range(0.3..0.9);
    if seed % 5 == 4 {
        let cube = Hypercube::new(rng.random_range(2..=3))?;
        let mut ledger = Ledger::new(LedgerMode::PerColor, bias)?;
        for c in cube.all_colors() {
            if rng.random_bool(density) {
                ledger.set_color(c, entry(regret_value(&mut rng)));
            }
        }
        return Ok(FuzzCase {
            seed,
            graph: Box::new(cube),
            ledger,
            cap,
        });
    }
    let n = rng.random_range(2..=8);
    let mut edges: BTreeSet<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for s in 0..n {
        for t in 0..n {
            if s != t && rng.random_bool(0.25) {
                edges.insert((s, t));
            }
        }
    }
    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    let graph = ExplicitGraph::unit(n, &edges)?;
    let mut ledger = Ledger::new(LedgerMode::PerEdge, bias)?;
    for &(s, t) in &edges {
        if rng.random_bool(density) {
            ledger.set_edge(
                graph.vertex(s),
                graph.vertex(t),
                entry(regret_value(&mut rng)),
            );
        }
    }
    Ok(FuzzCase {
        seed,
        graph: Box::new(graph),
        ledger,
        cap,
    })
}

fn tagged(mut r: CheckReport, seed: u64) -> CheckReport {
    if let Some(w) = r.witness.take() {
        r.witness = Some(format!("case seed {seed}: {w}"));
    }
    r
}

fn case_seeds(seed: u64, cases: usize) -> impl Iterator<Item = u64> {
    (0..cases as u64).map(move |i| seed.wrapping_mul(1_000_003).wrapping_add(i))
}

pub fn campaign_requirement2(seed: u64, cases: usize, tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::campaign("requirement2-fuzz");
    for s in case_seeds(seed, cases) {
        let case = fuzz_case(s)?;
        let dist = stationary_distribution(&case.ledger, &case.graph, &case.params())?;
        report.absorb(tagged(
            check_requirement2(&dist, &case.ledger, &case.graph, case.cap, tol)?,
            s,
        ));
    }
    Ok(report)
}

/// Exact solver against [`dense_reference`]: L∞ distance and degenerate flag.
pub fn campaign_solver_oracle(seed: u64, cases: usize, tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::campaign("solver-oracle");
    for s in case_seeds(seed, cases) {
        let case = fuzz_case(s)?;
        let got = stationary_distribution(&case.ledger, &case.graph, &case.params())?;
        let want = dense_reference(&case.ledger, &case.graph, case.cap)?;
        let keys: BTreeSet<&VertexId> = got.probs().keys().chain(want.probs().keys()).collect();
        let mut worst = (0.0f64, String::new());
        for v in keys {
            let d = (got.prob(v) - want.prob(v)).abs();
            if d > worst.0 {
                worst = (
                    d,
                    format!(
                        "π({}) = {:.12} but oracle says {:.12}",
                        case.graph.display_vertex(v),
                        got.prob(v),
                        want.prob(v)
                    ),
                );
            }
        }
        let r = if got.is_degenerate() != want.is_degenerate() {
            CheckReport::fail(
                "solver-oracle",
                f64::INFINITY,
                format!(
                    "degenerate {} vs oracle {}",
                    got.is_degenerate(),
                    want.is_degenerate()
                ),
            )
        } else {
            CheckReport::judge("solver-oracle", worst.0, tol, || worst.1)
        };
        report.absorb(tagged(r, s));
    }
    Ok(report)
}

pub fn campaign_flow_lemmas(seed: u64, cases: usize) -> Result<CheckReport> {
    let mut report = CheckReport::campaign("flow-lemmas-fuzz");
    for s in case_seeds(seed, cases) {
        let case = fuzz_case(s)?;
        let dist = stationary_distribution(&case.ledger, &case.graph, &case.params())?;
        report.absorb(tagged(
            check_flow_lemmas(&dist, &case.ledger, &case.graph, case.cap)?,
            s,
        ));
    }
    Ok(report)
}

/// Blackwell condition with `b = Δ/(L+1)` (0 when unbounded), against the
/// exact worst-case utility and a handful of random ones.
pub fn campaign_blackwell(seed: u64, cases: usize) -> Result<CheckReport> {
    let mut report = CheckReport::campaign("blackwell-fuzz");
    let delta = 1.0;
    for s in case_seeds(seed, cases) {
        let case = fuzz_case(s)?;
        let b = match case.cap {
            LevelCap::Bounded(l) => delta / (l as f64 + 1.0),
            LevelCap::Unbounded => 0.0,
        };
        let dist = stationary_distribution(&case.ledger, &case.graph, &case.params())?;
        report.absorb(tagged(
            blackwell_worst_case(&dist, &case.ledger, &case.graph, b, delta)?,
            s,
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0xb1ac_4e11);
        for _ in 0..4 {
            let key: u64 = rng.random();
            let u = |v: &VertexId| {
                let mut t = RandomUtilityTask::new(ChaCha8Rng::seed_from_u64(key));
                Task::<f64>::advance(&mut t, 1)
                    .and_then(|_| Task::<f64>::utility(&t, v))
                    .unwrap_or(0.0)
                    * delta
            };
            report.absorb(tagged(
                check_blackwell(&dist, &case.ledger, &case.graph, b, delta, u)?,
                s,
            ));
        }
    }
    Ok(report)
}

/// On complete unit graphs, local swap regret equals global swap regret and
/// local external regret equals global external regret over `D`, with the
/// global side recomputed from the raw utility history.
pub fn campaign_complete_graph(seed: u64, cases: usize, steps: usize) -> Result<CheckReport> {
    let mut report = CheckReport::campaign("complete-graph-equivalence");
    for s in case_seeds(seed, cases) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let k = rng.random_range(2..=6);
        let g = CompleteGraph::new(k)?;
        let verts = g.all_vertices();
        let params = PolicyParams::new(LevelCap::Bounded(1), 0.5);
        let mut ledger = Ledger::new(LedgerMode::PerEdge, 0.5)?;
        let mut task = RandomUtilityTask::new(ChaCha8Rng::seed_from_u64(rng.random()));
        // gain[a][b] = Σ_{t: a^t = a} u(b) - u(a)
        let mut gain = vec![vec![0.0f64; k]; k];
        for t in 1..=steps {
            let a = compute_policy(&ledger, &g, &params, &mut rng)?.sample(&mut rng);
            Task::<f64>::advance(&mut task, t)?;
            let u: Vec<f64> = verts
                .iter()
                .map(|v| Task::<f64>::utility(&task, v))
                .collect::<Result<_>>()?;
            let ai = g.index(&a)?;
            for b in 0..k {
                gain[ai][b] += u[b] - u[ai];
            }
            ledger.update_swap(&g, &a, |v| Task::<f64>::utility(&task, v))?;
        }
        let global_swap: f64 = gain
            .iter()
            .enumerate()
            .map(|(a, row)| {
                (0..k)
                    .filter(|&b| b != a)
                    .map(|b| row[b].max(0.0))
                    .fold(0.0, f64::max)
            })
            .sum();
        let global_external = (0..k)
            .map(|b| (0..k).map(|a| gain[a][b]).sum::<f64>())
            .fold(0.0, f64::max);
        let ls = local_swap(&ledger)?;
        let (le, _) = local_external_exhaustive(&ledger, &g, 64)?;
        let d = (k - 1) as f64;
        let r1 = (ls - global_swap).abs();
        let r2 = (le - global_external / d).abs();
        let r = CheckReport::judge("complete-graph-equivalence", r1.max(r2), 1e-12, || {
            format!("k = {k}: local swap {ls} vs global {global_swap}; local external {le} vs global/D {}", global_external / d)
        });
        report.absorb(tagged(r, s));
    }
    Ok(report)
}

/// Hypercube colorings for `n <= 4`, the tree-edit coloring over two
/// variables, and a negative control: the one-color coloring must fail.
pub fn campaign_admissibility() -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for n in 1..=4 {
        let mut r = check_graph_admissibility(&Hypercube::new(n)?, 64)?;
        r.check = format!("admissibility-hypercube-{n}");
        out.push(r);
    }
    let mut r = check_graph_admissibility(&DecisionTreeGraph::new(2)?, 100)?;
    r.check = "admissibility-tree-edits-2".into();
    out.push(r);
    let cube = Hypercube::new(3)?;
    let m = materialize(&cube, 64)?;
    let control = check_admissibility(&cube, &m, |_| ColorId::from_vec(vec![0]));
    out.push(if control.passed {
        CheckReport::fail(
            "admissibility-negative-control",
            0.0,
            "one-color 3-cube reported admissible".into(),
        )
    } else {
        CheckReport::pass("admissibility-negative-control", 0.0)
    });
    Ok(out)
}

/// Random play with random utilities, returning the per-edge ledger.
fn random_trace<G: LocalityGraph + ?Sized>(
    graph: &G,
    vertices: &[VertexId],
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Ledger<f64>> {
    let mut ledger = Ledger::new(LedgerMode::PerEdge, 0.0)?;
    let mut task = RandomUtilityTask::new(ChaCha8Rng::seed_from_u64(rng.random()));
    for t in 1..=steps {
        let a = vertices.choose(rng).expect("nonempty").clone();
        Task::<f64>::advance(&mut task, t)?;
        ledger.update_swap(graph, &a, |v| Task::<f64>::utility(&task, v))?;
    }
    Ok(ledger)
}

pub fn campaign_product_theorem(seed: u64, cases: usize, steps: usize) -> Result<CheckReport> {
    let k2: Arc<dyn LocalityGraph> = Arc::new(CompleteGraph::new(2)?);
    let product = ProductGraph::new(vec![k2.clone(), k2])?;
    let vertices = materialize(&product, 16)?.vertices;
    let mut report = CheckReport::campaign("product-theorem");
    for s in case_seeds(seed, cases) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let ledger = random_trace(&product, &vertices, steps, &mut rng)?;
        report.absorb(tagged(check_product_theorem(&product, &ledger, 16)?, s));
    }
    Ok(report)
}

pub fn campaign_color_dominance(seed: u64, cases: usize, steps: usize) -> Result<CheckReport> {
    let cube = Hypercube::new(3)?;
    let vertices = cube.all_vertices();
    let mut report = CheckReport::campaign("color-dominance");
    for s in case_seeds(seed, cases) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let ledger = random_trace(&cube, &vertices, steps, &mut rng)?;
        report.absorb(tagged(check_color_dominance(&cube, &ledger, 64)?, s));
    }
    Ok(report)
}

/// Tree edit distance against uniform-cost search for every ordered pair of
/// trees over two variables, and the shortest-path edge test against the
/// distance identity on every edge and target.
pub fn campaign_dtree_metric() -> Result<Vec<CheckReport>> {
    let g = DecisionTreeGraph::new(2)?;
    let trees = enumerate_trees(&[0, 1], 2)?;
    let mut dist = CheckReport::campaign("tree-distance");
    for a in &trees {
        for b in &trees {
            let fast = disagreement(a, b).distance();
            let slow = shortest_distance(&g, &a.encode(), &b.encode(), 1000)?;
            let r = if slow == Some(fast) {
                CheckReport::pass("tree-distance", 0.0)
            } else {
                CheckReport::fail(
                    "tree-distance",
                    1.0,
                    format!("d({a}, {b}) = {fast} but search finds {slow:?}"),
                )
            };
            dist.absorb(r);
        }
    }
    let m = materialize(&g, 100)?;
    let mut edges = CheckReport::campaign("tree-edge-on-shortest-path");
    for b in 0..m.len() {
        let to_b = m.distances_to(b);
        let target = DecisionTree::decode(&m.vertices[b])?;
        for (i, list) in m.out.iter().enumerate() {
            for (j, e) in list {
                let edit = Edit::decode(&e.color).expect("tree graph colors are edits");
                let want = Materialized::on_shortest_path(&to_b, i, *j, e.length);
                let got = edge_on_shortest_path(&edit, &target);
                let r = if want == got {
                    CheckReport::pass("tree-edge-on-shortest-path", 0.0)
                } else {
                    CheckReport::fail(
                        "tree-edge-on-shortest-path",
                        1.0,
                        format!("edit {edit} at {} toward {target}: test says {got}, distances say {want}", g.display_vertex(&m.vertices[i])),
                    )
                };
                edges.absorb(r);
            }
        }
    }
    Ok(vec![dist, edges])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusSize {
    /// Case counts used for acceptance.
    Full,
    /// A few cases per campaign, for smoke runs.
    Quick,
}

/// Every campaign with its standard case count.
pub fn run_corpus(seed: u64, size: CorpusSize) -> Result<Vec<CheckReport>> {
    let (fuzz, oracle, complete, product, color) = match size {
        CorpusSize::Full => (1000, 500, 50, 500, 200),
        CorpusSize::Quick => (50, 50, 5, 20, 20),
    };
    let mut out = vec![
        campaign_requirement2(seed, fuzz, 1e-8)?,
        campaign_solver_oracle(seed, oracle, 1e-8)?,
        campaign_flow_lemmas(seed, fuzz)?,
        campaign_blackwell(seed, fuzz)?,
        campaign_complete_graph(seed, complete, 200)?,
        campaign_product_theorem(seed, product, 200)?,
        campaign_color_dominance(seed, color, 200)?,
    ];
    out.extend(campaign_admissibility()?);
    out.extend(campaign_dtree_metric()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_reproducible() {
        let a = fuzz_case(42).unwrap();
        let b = fuzz_case(42).unwrap();
        assert_eq!(format!("{:?}", a.ledger), format!("{:?}", b.ledger));
        assert_eq!(a.cap, b.cap);
        assert_eq!(a.graph.root(), b.graph.root());
    }

    #[test]
    fn quick_corpus_is_green() {
        for r in run_corpus(3, CorpusSize::Quick).unwrap() {
            assert!(r.passed, "{r}");
        }
    }
}
