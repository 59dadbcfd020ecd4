use std::collections::{BTreeMap, BTreeSet};

use super::CheckReport;
use crate::error::Result;
use crate::graph::{LevelCap, LocalityGraph, VertexId};
use crate::regret::{Distribution, Ledger, Policy, RunObserver};
use crate::scalar::Scalar;

/// `f(i, j) = π_i · R̃⁺(i, j)` on every edge with positive flow.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowField {
    pub flows: BTreeMap<(VertexId, VertexId), f64>,
}

impl FlowField {
    pub fn total(&self) -> f64 {
        self.flows.values().sum()
    }

    pub fn inflow(&self) -> BTreeMap<VertexId, f64> {
        let mut m = BTreeMap::new();
        for ((_, j), f) in &self.flows {
            *m.entry(j.clone()).or_insert(0.0) += f;
        }
        m
    }

    pub fn outflow(&self) -> BTreeMap<VertexId, f64> {
        let mut m = BTreeMap::new();
        for ((i, _), f) in &self.flows {
            *m.entry(i.clone()).or_insert(0.0) += f;
        }
        m
    }
}

pub fn flow_field<S, G>(dist: &Distribution<S>, ledger: &Ledger<S>, graph: &G) -> Result<FlowField>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    let mut flows = BTreeMap::new();
    for (v, p) in dist.probs() {
        let p = p.to_f64_lossy();
        for (t, r) in ledger.positive_out(graph, v)? {
            let f = p * r.to_f64_lossy();
            if f > 0.0 {
                *flows.entry((v.clone(), t)).or_insert(0.0) += f;
            }
        }
    }
    Ok(FlowField { flows })
}

fn level_of<G: LocalityGraph + ?Sized>(
    graph: &G,
    cache: &mut BTreeMap<VertexId, usize>,
    v: &VertexId,
) -> Result<usize> {
    if let Some(&l) = cache.get(v) {
        return Ok(l);
    }
    let l = graph.level(v)?;
    cache.insert(v.clone(), l);
    Ok(l)
}

/// Checks items (a) to (e): normalization, level support, balance at levels
/// `1..=L`, root balance with the level `L+1` inflow redirected to it, and
/// the degenerate dichotomy.
///
/// Balance residuals are `|inflow - π_j · outflow| / M'` with
/// `M' = max(M, largest supported outflow)`, which is the same equation with
/// a normalizer that keeps every implied self-loop nonnegative.
pub fn check_requirement2<S, G>(
    dist: &Distribution<S>,
    ledger: &Ledger<S>,
    graph: &G,
    cap: LevelCap,
    tol: f64,
) -> Result<CheckReport>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    const NAME: &str = "requirement2";
    let show = |v: &VertexId| graph.display_vertex(v);

    // (a)
    let mut total = 0.0;
    for (v, p) in dist.probs() {
        let p = p.to_f64_lossy();
        if !(p >= 0.0) || !p.is_finite() {
            return Ok(CheckReport::fail(
                NAME,
                f64::INFINITY,
                format!("(a) π({}) = {p}", show(v)),
            ));
        }
        total += p;
    }
    if (total - 1.0).abs() > tol {
        return Ok(CheckReport::fail(
            NAME,
            (total - 1.0).abs(),
            format!("(a) total mass {total}"),
        ));
    }

    // (b)
    let mut levels = BTreeMap::new();
    for v in dist.probs().keys() {
        let l = level_of(graph, &mut levels, v)?;
        if !cap.admits(l) {
            return Ok(CheckReport::fail(
                NAME,
                dist.prob(v).to_f64_lossy(),
                format!("(b) mass on {} at level {l} > {cap}", show(v)),
            ));
        }
    }

    let mut out_rate: BTreeMap<VertexId, f64> = BTreeMap::new();
    let mut inflow: BTreeMap<VertexId, f64> = BTreeMap::new();
    let mut m_prime = ledger.max_positive().to_f64_lossy();
    for (v, p) in dist.probs() {
        let p = p.to_f64_lossy();
        let moves = ledger.positive_out(graph, v)?;
        let out: f64 = moves.iter().map(|(_, r)| r.to_f64_lossy()).sum();
        m_prime = m_prime.max(out);
        out_rate.insert(v.clone(), out);
        for (t, r) in moves {
            *inflow.entry(t).or_insert(0.0) += p * r.to_f64_lossy();
        }
    }

    // (e)
    let zero_out: Vec<&VertexId> = out_rate
        .iter()
        .filter(|(_, o)| **o == 0.0)
        .map(|(v, _)| v)
        .collect();
    let all_zero = zero_out.len() == out_rate.len();
    if !zero_out.is_empty() && !all_zero {
        let busy = out_rate
            .iter()
            .find(|(_, o)| **o > 0.0)
            .map(|(v, _)| show(v))
            .unwrap_or_default();
        return Ok(CheckReport::fail(
            NAME,
            f64::INFINITY,
            format!(
                "(e) {} has no positive out-regret but {busy} does",
                show(zero_out[0])
            ),
        ));
    }
    if all_zero != dist.is_degenerate() {
        return Ok(CheckReport::fail(
            NAME,
            f64::INFINITY,
            format!(
                "(e) degenerate flag {} but support outflow zero = {all_zero}",
                dist.is_degenerate()
            ),
        ));
    }
    if m_prime == 0.0 {
        return Ok(CheckReport::pass(NAME, 0.0));
    }

    // (c) and (d)
    let root = graph.root();
    let mut redirected = 0.0;
    let mut worst = (0.0f64, String::new());
    let touched: BTreeSet<VertexId> = dist.probs().keys().chain(inflow.keys()).cloned().collect();
    for j in &touched {
        let l = level_of(graph, &mut levels, j)?;
        let inn = inflow.get(j).copied().unwrap_or(0.0);
        if !cap.admits(l) {
            redirected += inn;
            continue;
        }
        if l == 0 {
            continue;
        }
        let out = dist.prob(j).to_f64_lossy() * out_rate.get(j).copied().unwrap_or(0.0);
        let r = (inn - out).abs() / m_prime;
        if r > worst.0 {
            worst = (
                r,
                format!(
                    "(c) balance at {} (level {l}): in {inn:.6e}, out {out:.6e}",
                    show(j)
                ),
            );
        }
    }
    let root_in = inflow.get(&root).copied().unwrap_or(0.0) + redirected;
    let root_out = dist.prob(&root).to_f64_lossy() * out_rate.get(&root).copied().unwrap_or(0.0);
    let r = (root_in - root_out).abs() / m_prime;
    if r > worst.0 {
        worst = (r, format!("(d) root balance: in {root_in:.6e} (redirected {redirected:.6e}), out {root_out:.6e}"));
    }
    Ok(CheckReport::judge(NAME, worst.0, tol, || worst.1))
}

/// Flow conservation at levels `1..=L`, total flow at least `(L+1)` times the
/// flow into level `L+1`, and root outflow at least that flow, all relative
/// to the total flow.
pub fn check_flow_lemmas<S, G>(
    dist: &Distribution<S>,
    ledger: &Ledger<S>,
    graph: &G,
    cap: LevelCap,
) -> Result<CheckReport>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    const NAME: &str = "flow-lemmas";
    const REL: f64 = 1e-8;
    let field = flow_field(dist, ledger, graph)?;
    let total = field.total();
    if total == 0.0 {
        return Ok(CheckReport::pass(NAME, 0.0));
    }
    let inflow = field.inflow();
    let outflow = field.outflow();
    let mut levels = BTreeMap::new();
    let mut worst = (0.0f64, String::new());
    let mut into_next = 0.0;
    let vertices: BTreeSet<&VertexId> = inflow.keys().chain(outflow.keys()).collect();
    for j in vertices {
        let l = level_of(graph, &mut levels, j)?;
        let inn = inflow.get(j).copied().unwrap_or(0.0);
        if !cap.admits(l) {
            into_next += inn;
        } else if l >= 1 {
            let out = outflow.get(j).copied().unwrap_or(0.0);
            let r = (inn - out).abs() / total;
            if r > worst.0 {
                worst = (
                    r,
                    format!(
                        "conservation at {} (level {l}): in {inn:.6e}, out {out:.6e}",
                        graph.display_vertex(j)
                    ),
                );
            }
        }
    }
    if let LevelCap::Bounded(l) = cap {
        let gap = ((l as f64 + 1.0) * into_next - total) / total;
        if gap > worst.0 {
            worst = (
                gap,
                format!("total flow {total:.6e} < (L+1) x flow into level L+1 {into_next:.6e}"),
            );
        }
        let root_out = outflow.get(&graph.root()).copied().unwrap_or(0.0);
        let gap = (into_next - root_out) / total;
        if gap > worst.0 {
            worst = (
                gap,
                format!("root outflow {root_out:.6e} < flow into level L+1 {into_next:.6e}"),
            );
        }
    }
    Ok(CheckReport::judge(NAME, worst.0, REL, || worst.1))
}

/// `Σ R̃⁺(i,j) π_i (u(j) - u(i) - b) <= 1e-9 · max(1, Σf · Δ)`.
pub fn check_blackwell<S, G, U>(
    dist: &Distribution<S>,
    ledger: &Ledger<S>,
    graph: &G,
    b: f64,
    delta: f64,
    utility: U,
) -> Result<CheckReport>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
    U: Fn(&VertexId) -> f64,
{
    let field = flow_field(dist, ledger, graph)?;
    let mut sum = 0.0;
    for ((i, j), f) in &field.flows {
        sum += f * (utility(j) - utility(i) - b);
    }
    let tol = 1e-9 * (field.total() * delta).max(1.0);
    let r = if dist.is_degenerate() && sum != 0.0 {
        f64::INFINITY
    } else {
        sum
    };
    Ok(CheckReport::judge("blackwell", r, tol, || {
        format!(
            "sum {sum:.6e} with b = {b}, Δ = {delta}, total flow {:.6e}",
            field.total()
        )
    }))
}

/// The utility in `[0, Δ]` maximizing the Blackwell sum: the sum is linear in
/// `u` with coefficient `inflow - outflow` per vertex, so each vertex takes
/// `Δ` exactly when its net inflow is positive.
pub fn blackwell_worst_case<S, G>(
    dist: &Distribution<S>,
    ledger: &Ledger<S>,
    graph: &G,
    b: f64,
    delta: f64,
) -> Result<CheckReport>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    let field = flow_field(dist, ledger, graph)?;
    let mut net = field.inflow();
    for (v, o) in field.outflow() {
        *net.entry(v).or_insert(0.0) -= o;
    }
    let u: BTreeMap<VertexId, f64> = net
        .into_iter()
        .map(|(v, c)| (v, if c > 0.0 { delta } else { 0.0 }))
        .collect();
    check_blackwell(dist, ledger, graph, b, delta, |v| {
        u.get(v).copied().unwrap_or(0.0)
    })
}

/// Checks every exact policy of a run against [`check_requirement2`].
/// Factored policies are expanded to their joint when the cube is small;
/// chain-walk samples are skipped.
pub struct Requirement2Observer<'g, G: ?Sized> {
    pub graph: &'g G,
    pub cap: LevelCap,
    pub tol: f64,
    pub report: CheckReport,
}

impl<'g, G: LocalityGraph + ?Sized> Requirement2Observer<'g, G> {
    pub fn new(graph: &'g G, cap: LevelCap, tol: f64) -> Self {
        Requirement2Observer {
            graph,
            cap,
            tol,
            report: CheckReport::campaign("requirement2-paranoid"),
        }
    }
}

impl<S: Scalar, G: LocalityGraph + ?Sized> RunObserver<S> for Requirement2Observer<'_, G> {
    fn on_policy(&mut self, t: usize, ledger: &Ledger<S>, policy: &Policy<S>) -> Result<()> {
        let dist = match policy {
            Policy::Joint(d) => d.clone(),
            Policy::Factored(m) if m.p_on.len() <= 12 => m.joint(ledger)?,
            _ => return Ok(()),
        };
        let mut r = check_requirement2(&dist, ledger, self.graph, self.cap, self.tol)?;
        if let Some(w) = r.witness.take() {
            r.witness = Some(format!("step {t}: {w}"));
        }
        self.report.absorb(r);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ExplicitGraph;
    use crate::regret::{entry, stationary_distribution, LedgerMode, PolicyParams};

    fn cycle() -> (ExplicitGraph, Ledger<f64>) {
        let g = ExplicitGraph::unit(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        for (s, t) in [(0, 1), (1, 2), (2, 0)] {
            l.set_edge(g.vertex(s), g.vertex(t), entry(1.0));
        }
        (g, l)
    }

    #[test]
    fn degenerate_root_passes() {
        let g = ExplicitGraph::unit(2, &[(0, 1)]).unwrap();
        let l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        let d = Distribution::point_mass(g.root(), true);
        assert!(
            check_requirement2(&d, &l, &g, LevelCap::Bounded(1), 1e-12)
                .unwrap()
                .passed
        );
        let b = check_blackwell(&d, &l, &g, 0.5, 1.0, |_| 0.3).unwrap();
        assert!(b.passed && b.worst_residual == 0.0);
    }

    #[test]
    fn uniform_cycle_passes_and_conserves() {
        let (g, l) = cycle();
        let p = PolicyParams::new(LevelCap::Bounded(2), 0.0);
        let d = stationary_distribution(&l, &g, &p).unwrap();
        let r = check_requirement2(&d, &l, &g, LevelCap::Bounded(2), 1e-10).unwrap();
        assert!(r.passed && r.worst_residual < 1e-10, "{r}");
        let f = flow_field(&d, &l, &g).unwrap();
        for v in f.inflow().values() {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(
            check_flow_lemmas(&d, &l, &g, LevelCap::Bounded(2))
                .unwrap()
                .passed
        );
    }

    #[test]
    fn mass_beyond_cap_fails_with_witness() {
        let (g, l) = cycle();
        let w = BTreeMap::from([(g.vertex(0), 0.5), (g.vertex(2), 0.5)]);
        let d = Distribution::from_weights(w, false).unwrap();
        let r = check_requirement2(&d, &l, &g, LevelCap::Bounded(1), 1e-8).unwrap();
        assert!(!r.passed);
        assert!(r.witness.unwrap().contains("(b)"));
    }

    #[test]
    fn corrupted_balance_fails() {
        let (g, l) = cycle();
        let w = BTreeMap::from([(g.vertex(0), 0.5), (g.vertex(1), 0.25), (g.vertex(2), 0.25)]);
        let d = Distribution::from_weights(w, false).unwrap();
        let r = check_requirement2(&d, &l, &g, LevelCap::Bounded(2), 1e-8).unwrap();
        assert!(!r.passed && r.witness.is_some());
    }

    #[test]
    fn worst_case_blackwell_on_capped_path() {
        // 0 -> 1 -> 2 with the cap at 1: flow into level 2 is redirected.
        let g = ExplicitGraph::unit(3, &[(0, 1), (1, 2)]).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.5).unwrap();
        l.set_edge(g.vertex(0), g.vertex(1), entry(1.0));
        l.set_edge(g.vertex(1), g.vertex(2), entry(2.0));
        let cap = LevelCap::Bounded(1);
        let d = stationary_distribution(&l, &g, &PolicyParams::new(cap, 0.5)).unwrap();
        assert!(check_requirement2(&d, &l, &g, cap, 1e-12).unwrap().passed);
        let r = blackwell_worst_case(&d, &l, &g, 0.5, 1.0).unwrap();
        assert!(r.passed, "{r}");
        // With too small a bias the same adversary wins.
        let r = blackwell_worst_case(&d, &l, &g, 0.2, 1.0).unwrap();
        assert!(!r.passed);
    }
}
