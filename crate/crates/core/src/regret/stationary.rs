//! The action distribution of regret matching.
//!
//! The chain moves from `j` along each out-edge `(j, k)` at rate equal to the
//! positive biased regret of the key governing that edge. A move into a vertex
//! one level beyond the cap is redirected to the root. The distribution played
//! is the long-run (Cesàro) occupation of this chain started at the root.
//!
//! Scaling all rates by `1/M` changes nothing about long-run occupation, so
//! the exact solver works with the rates directly: it decomposes the active
//! set into strongly connected components, pushes the root's unit mass through
//! the transient ones by a linear solve for expected visits, and spreads the
//! mass reaching each closed component according to that component's
//! stationary vector.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::ledger::Ledger;
use super::linalg::Dense;
use crate::error::{Error, Result};
use crate::graph::hypercube::pack_bits;
use crate::graph::{HypercubeColor, LevelCap, LocalityGraph, VertexId};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    /// Exact long-run occupation from the root.
    ExactCesaro,
    /// Product of per-coordinate two-state chains; hypercube, per-color, unbounded level cap.
    Factored,
    /// Sample by simulating the chain instead of solving it.
    ChainWalk,
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMode::ExactCesaro => "exact-cesaro",
            SolverMode::Factored => "factored",
            SolverMode::ChainWalk => "chain-walk",
        })
    }
}

impl FromStr for SolverMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact-cesaro" | "exact" => Ok(SolverMode::ExactCesaro),
            "factored" => Ok(SolverMode::Factored),
            "chain-walk" | "walk" => Ok(SolverMode::ChainWalk),
            other => Err(format!(
                "unknown solver `{other}` (exact-cesaro, factored, chain-walk)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParams<S> {
    pub level_cap: LevelCap,
    pub bias: S,
    pub solver: SolverMode,
    /// Largest balance-equation residual accepted from the exact solver.
    pub tolerance: f64,
    /// Refinement sweeps allowed when the direct solve misses `tolerance`.
    pub max_iterations: usize,
    pub active_set_cap: usize,
    /// Chain-walk horizon in uniformized steps; `None` means `10 * (positive keys) + 100`.
    pub walk_length: Option<usize>,
    /// Fall back to chain-walk sampling when the exact solver hits the cap.
    pub walk_on_capacity: bool,
}

impl<S: Scalar> PolicyParams<S> {
    pub fn new(level_cap: LevelCap, bias: S) -> Self {
        PolicyParams {
            level_cap,
            bias,
            solver: SolverMode::ExactCesaro,
            tolerance: 1e-10,
            max_iterations: 1_000_000,
            active_set_cap: 4096,
            walk_length: None,
            walk_on_capacity: false,
        }
    }

    pub fn with_solver(mut self, solver: SolverMode) -> Self {
        self.solver = solver;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 || self.active_set_cap == 0 || self.walk_length == Some(0) {
            return Err(Error::InvalidParameter(
                "iteration, cap and walk limits must be positive".into(),
            ));
        }
        if !(self.bias >= S::zero()) {
            return Err(Error::InvalidParameter("bias must be >= 0".into()));
        }
        if self.level_cap == LevelCap::Bounded(0) {
            return Err(Error::InvalidParameter("level cap must be positive".into()));
        }
        Ok(())
    }
}

/// Sparse distribution over vertices. Probabilities are positive and sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<S> {
    probs: BTreeMap<VertexId, S>,
    degenerate: bool,
}

impl<S: Scalar> Distribution<S> {
    pub fn point_mass(v: VertexId, degenerate: bool) -> Self {
        Distribution {
            probs: BTreeMap::from([(v, S::one())]),
            degenerate,
        }
    }

    /// Normalizes nonnegative weights; zero weights are dropped.
    pub fn from_weights(weights: BTreeMap<VertexId, S>, degenerate: bool) -> Result<Self> {
        let total: S = weights.values().copied().sum();
        if !(total > S::zero()) || !total.is_finite() {
            return Err(Error::InvalidParameter(
                "distribution needs positive finite mass".into(),
            ));
        }
        let probs = weights
            .into_iter()
            .filter(|(_, w)| *w > S::zero())
            .map(|(v, w)| (v, w / total))
            .collect();
        Ok(Distribution { probs, degenerate })
    }

    pub fn probs(&self) -> &BTreeMap<VertexId, S> {
        &self.probs
    }

    pub fn prob(&self, v: &VertexId) -> S {
        self.probs.get(v).copied().unwrap_or_else(S::zero)
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    /// Inverse-CDF draw over the canonically ordered support.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexId {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = None;
        for (v, p) in &self.probs {
            acc += p.to_f64_lossy();
            if u < acc {
                return v.clone();
            }
            last = Some(v);
        }
        last.expect("distribution has nonempty support").clone()
    }
}

/// Per-coordinate marginals of the factored hypercube distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMarginals<S> {
    /// `P(coordinate i = 1)`.
    pub p_on: Vec<S>,
    /// Coordinates with no positive regret in either direction.
    pub degenerate: Vec<bool>,
}

impl<S: Scalar> ProductMarginals<S> {
    /// Draws coordinates in index order, one uniform draw each.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexId {
        let bits: Vec<bool> = self
            .p_on
            .iter()
            .map(|p| rng.random::<f64>() < p.to_f64_lossy())
            .collect();
        pack_bits(&bits)
    }

    /// The joint distribution as an explicit product. Small `n` only.
    pub fn joint(&self, ledger: &Ledger<S>) -> Result<Distribution<S>> {
        let n = self.p_on.len();
        if n >= 24 {
            return Err(Error::Unsupported(format!(
                "refusing to expand a {n}-cube joint"
            )));
        }
        let mut weights = BTreeMap::new();
        for mask in 0u64..(1 << n) {
            let mut w = S::one();
            let mut bits = Vec::with_capacity(n);
            for (i, p) in self.p_on.iter().enumerate() {
                let on = mask >> i & 1 == 1;
                w *= if on { *p } else { S::one() - *p };
                bits.push(on);
            }
            if w > S::zero() {
                weights.insert(pack_bits(&bits), w);
            }
        }
        // Degenerate when no supported vertex has a positive out-color.
        let degenerate = weights.keys().all(|v| {
            (0..n).all(|i| {
                let on = crate::graph::hypercube::get_bit(v, i);
                let c = HypercubeColor { var: i, value: !on }.encode();
                ledger.color(&c).biased <= S::zero()
            })
        });
        Distribution::from_weights(weights, degenerate)
    }
}

/// What the learner plays from at one step.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy<S> {
    Joint(Distribution<S>),
    Factored(ProductMarginals<S>),
    /// A single state drawn by simulating the chain.
    Walk(VertexId),
}

impl<S: Scalar> Policy<S> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> VertexId {
        match self {
            Policy::Joint(d) => d.sample(rng),
            Policy::Factored(m) => m.sample(rng),
            Policy::Walk(v) => v.clone(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            Policy::Joint(d) => d.is_degenerate(),
            Policy::Factored(m) => m.degenerate.iter().all(|&d| d),
            Policy::Walk(_) => false,
        }
    }
}

/// Picks the configured solver. Chain-walk draws from `rng`, so the returned
/// policy is already a sample in that mode.
pub fn compute_policy<S, G, R>(
    ledger: &Ledger<S>,
    graph: &G,
    params: &PolicyParams<S>,
    rng: &mut R,
) -> Result<Policy<S>>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
    R: Rng + ?Sized,
{
    match params.solver {
        SolverMode::ExactCesaro => match stationary_distribution(ledger, graph, params) {
            Ok(d) => Ok(Policy::Joint(d)),
            Err(Error::Capacity { .. }) if params.walk_on_capacity => {
                chain_walk(ledger, graph, params, rng).map(Policy::Walk)
            }
            Err(e) => Err(e),
        },
        SolverMode::Factored => {
            let n = graph.hypercube_dimension().ok_or_else(|| {
                Error::Unsupported("factored solver needs a hypercube graph".into())
            })?;
            factored_hypercube_distribution(ledger, n, params.level_cap).map(Policy::Factored)
        }
        SolverMode::ChainWalk => chain_walk(ledger, graph, params, rng).map(Policy::Walk),
    }
}

/// The rate chain restricted to the states reachable from the root.
#[derive(Clone, Debug)]
pub struct ActiveChain<S> {
    /// Root first, then BFS discovery order.
    pub states: Vec<VertexId>,
    pub index: BTreeMap<VertexId, usize>,
    /// Off-diagonal rates after redirection, merged per target, self-moves dropped.
    pub rates: Vec<Vec<(usize, S)>>,
    /// Sum of positive regret over the state's real out-edges, before redirection.
    pub edge_outflow: Vec<S>,
}

impl<S: Scalar> ActiveChain<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn outflow(&self, i: usize) -> S {
        self.rates[i].iter().map(|(_, r)| *r).sum()
    }
}

/// Positive moves out of `v` after redirecting level `L+1` targets to the root.
fn redirected_moves<S, G>(
    ledger: &Ledger<S>,
    graph: &G,
    cap: LevelCap,
    v: &VertexId,
    root: &VertexId,
) -> Result<(Vec<(VertexId, S)>, S)>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    let raw = ledger.positive_out(graph, v)?;
    let total: S = raw.iter().map(|(_, r)| *r).sum();
    let mut merged: BTreeMap<VertexId, S> = BTreeMap::new();
    let at_cap = match cap {
        LevelCap::Bounded(l) => graph.level(v)? >= l,
        LevelCap::Unbounded => false,
    };
    for (t, r) in raw {
        let t = if at_cap && !cap.admits(graph.level(&t)?) {
            root.clone()
        } else {
            t
        };
        if &t != v {
            *merged.entry(t).or_insert_with(S::zero) += r;
        }
    }
    Ok((merged.into_iter().collect(), total))
}

/// Enumerates the active set from the root, failing past `active_set_cap` states.
pub fn build_active_chain<S, G>(
    ledger: &Ledger<S>,
    graph: &G,
    level_cap: LevelCap,
    active_set_cap: usize,
) -> Result<ActiveChain<S>>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    let root = graph.root();
    let mut chain = ActiveChain {
        states: vec![root.clone()],
        index: BTreeMap::from([(root.clone(), 0)]),
        rates: Vec::new(),
        edge_outflow: Vec::new(),
    };
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let v = chain.states[i].clone();
        let (moves, total) = redirected_moves(ledger, graph, level_cap, &v, &root)?;
        let mut row = Vec::with_capacity(moves.len());
        for (t, r) in moves {
            let j = match chain.index.get(&t) {
                Some(&j) => j,
                None => {
                    let j = chain.states.len();
                    if j >= active_set_cap {
                        return Err(Error::Capacity {
                            count: j + 1,
                            cap: active_set_cap,
                        });
                    }
                    chain.states.push(t.clone());
                    chain.index.insert(t, j);
                    queue.push_back(j);
                    j
                }
            };
            row.push((j, r));
        }
        if chain.rates.len() <= i {
            chain.rates.resize_with(i + 1, Vec::new);
            chain.edge_outflow.resize(i + 1, S::zero());
        }
        chain.rates[i] = row;
        chain.edge_outflow[i] = total;
    }
    Ok(chain)
}

/// Exact action distribution of (b, L)-regret matching for this ledger.
///
/// When any state with no positive out-regret carries mass, the result is
/// restricted to such states and renormalized, so a distribution is either
/// fully degenerate or puts no mass on dead ends. With no positive regret at
/// all it is the degenerate point mass at the root.
pub fn stationary_distribution<S, G>(
    ledger: &Ledger<S>,
    graph: &G,
    params: &PolicyParams<S>,
) -> Result<Distribution<S>>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    params.validate()?;
    let m = ledger.max_positive();
    if m == S::zero() {
        return Ok(Distribution::point_mass(graph.root(), true));
    }
    let chain = build_active_chain(ledger, graph, params.level_cap, params.active_set_cap)?;
    let mut mass = long_run_mass(&chain, m)?;

    let absorbing_mass: S = (0..chain.len())
        .filter(|&i| chain.edge_outflow[i] == S::zero())
        .map(|i| mass[i])
        .sum();
    if absorbing_mass > S::zero() {
        for i in 0..chain.len() {
            if chain.edge_outflow[i] != S::zero() {
                mass[i] = S::zero();
            }
        }
    }

    let residual = balance_residual(&chain, &mass, m);
    if residual > params.tolerance {
        refine(&chain, &mut mass, m, params)?;
    }

    let degenerate = (0..chain.len())
        .filter(|&i| mass[i] > S::zero())
        .all(|i| chain.edge_outflow[i] == S::zero());
    let weights = chain
        .states
        .iter()
        .cloned()
        .zip(mass)
        .filter(|(_, w)| *w > S::zero())
        .collect();
    Distribution::from_weights(weights, degenerate)
}

/// Largest `|inflow - outflow|` over states, in units of `M`.
fn balance_residual<S: Scalar>(chain: &ActiveChain<S>, mass: &[S], m: S) -> f64 {
    let total: S = mass.iter().copied().sum();
    let mut net = vec![S::zero(); chain.len()];
    for (i, row) in chain.rates.iter().enumerate() {
        for &(j, r) in row {
            let f = mass[i] / total * r;
            net[j] += f;
            net[i] -= f;
        }
    }
    net.iter()
        .map(|x| (*x / m).abs().to_f64_lossy())
        .fold(0.0, f64::max)
}

/// Lazy uniformized sweeps `pi <- pi (I + Q / 2Λ)` until the residual is within tolerance.
fn refine<S: Scalar>(
    chain: &ActiveChain<S>,
    mass: &mut [S],
    m: S,
    params: &PolicyParams<S>,
) -> Result<()> {
    let lambda = (0..chain.len())
        .map(|i| chain.outflow(i))
        .fold(S::zero(), S::max)
        * S::of(2.0);
    let mut residual = balance_residual(chain, mass, m);
    let mut it = 0;
    while residual > params.tolerance {
        if it >= params.max_iterations {
            return Err(Error::Convergence {
                residual,
                iterations: it,
            });
        }
        let mut next = mass.to_vec();
        for (i, row) in chain.rates.iter().enumerate() {
            for &(j, r) in row {
                let f = mass[i] * r / lambda;
                next[j] += f;
                next[i] -= f;
            }
        }
        mass.copy_from_slice(&next);
        it += 1;
        residual = balance_residual(chain, mass, m);
    }
    Ok(())
}

/// Long-run occupation of the chain from state 0.
fn long_run_mass<S: Scalar>(chain: &ActiveChain<S>, m: S) -> Result<Vec<S>> {
    let n = chain.len();
    let sccs = tarjan(chain);
    let mut comp = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for &v in members {
            comp[v] = c;
        }
    }
    let mut entering = vec![S::zero(); n];
    entering[0] = S::one();
    let mut result = vec![S::zero(); n];
    let mut local = vec![usize::MAX; n];

    // Tarjan emits components in reverse topological order.
    for (c, members) in sccs.iter().enumerate().rev() {
        let mu: S = members.iter().map(|&v| entering[v]).sum();
        if mu == S::zero() {
            continue;
        }
        for (k, &v) in members.iter().enumerate() {
            local[v] = k;
        }
        let k = members.len();
        let closed = members
            .iter()
            .all(|&v| chain.rates[v].iter().all(|&(j, _)| comp[j] == c));
        if closed {
            let pi = closed_stationary(chain, members, &local, m)?;
            for (idx, &v) in members.iter().enumerate() {
                result[v] = pi[idx] * mu;
            }
        } else {
            // Expected visits x of the jump chain: (I - P_SS)^T x = entering mass.
            let mut a = Dense::zeros(k);
            let mut x: Vec<S> = members.iter().map(|&v| entering[v]).collect();
            for (idx, &v) in members.iter().enumerate() {
                *a.at(idx, idx) += S::one();
                let out = chain.outflow(v);
                for &(j, r) in &chain.rates[v] {
                    if comp[j] == c {
                        *a.at(local[j], idx) -= r / out;
                    }
                }
            }
            a.solve(&mut x)?;
            for (idx, &v) in members.iter().enumerate() {
                let out = chain.outflow(v);
                let visits = x[idx].max(S::zero());
                for &(j, r) in &chain.rates[v] {
                    if comp[j] != c {
                        entering[j] += visits * r / out;
                    }
                }
            }
        }
    }
    Ok(result)
}

/// Stationary vector of the generator restricted to a closed component.
fn closed_stationary<S: Scalar>(
    chain: &ActiveChain<S>,
    members: &[usize],
    local: &[usize],
    m: S,
) -> Result<Vec<S>> {
    let k = members.len();
    if k == 1 {
        return Ok(vec![S::one()]);
    }
    // Rows of Q^T; the last equation is replaced by normalization.
    let mut a = Dense::zeros(k);
    for (idx, &v) in members.iter().enumerate() {
        for &(j, r) in &chain.rates[v] {
            let r = r / m;
            *a.at(local[j], idx) += r;
            *a.at(idx, idx) -= r;
        }
    }
    for col in 0..k {
        *a.at(k - 1, col) = S::one();
    }
    let mut b = vec![S::zero(); k];
    b[k - 1] = S::one();
    a.solve(&mut b)?;
    for p in &mut b {
        *p = p.max(S::zero());
    }
    let total: S = b.iter().copied().sum();
    Ok(b.into_iter().map(|p| p / total).collect())
}

/// Strongly connected components, iteratively. Output is reverse topological.
fn tarjan<S>(chain: &ActiveChain<S>) -> Vec<Vec<usize>> {
    let n = chain.states.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0usize;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        call.push((start, 0));
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if *edge == 0 && index[v] == usize::MAX {
                index[v] = next;
                low[v] = next;
                next += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&(w, _)) = chain.rates[v].get(*edge) {
                *edge += 1;
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

/// Per-coordinate stationary marginals of the colored chain on the `n`-cube.
///
/// With an unbounded level cap the coordinates evolve independently: bit `i`
/// turns on at rate `α = R̃⁺(i, on)` and off at rate `β = R̃⁺(i, off)`, so
/// `P(on) = α / (α + β)`, and a coordinate with `α + β = 0` keeps the root's
/// value (off).
pub fn factored_hypercube_distribution<S: Scalar>(
    ledger: &Ledger<S>,
    n: usize,
    level_cap: LevelCap,
) -> Result<ProductMarginals<S>> {
    if level_cap != LevelCap::Unbounded {
        return Err(Error::Unsupported(
            "factored solver requires an unbounded level cap".into(),
        ));
    }
    if ledger.mode() != super::LedgerMode::PerColor {
        return Err(Error::Unsupported(
            "factored solver requires a per-color ledger".into(),
        ));
    }
    let mut p_on = Vec::with_capacity(n);
    let mut degenerate = Vec::with_capacity(n);
    for var in 0..n {
        let alpha = ledger
            .color(&HypercubeColor { var, value: true }.encode())
            .biased
            .pos();
        let beta = ledger
            .color(&HypercubeColor { var, value: false }.encode())
            .biased
            .pos();
        if alpha + beta > S::zero() {
            p_on.push(alpha / (alpha + beta));
            degenerate.push(false);
        } else {
            p_on.push(S::zero());
            degenerate.push(true);
        }
    }
    Ok(ProductMarginals { p_on, degenerate })
}

/// Simulates the chain from the root and returns the state occupied at a
/// uniformly drawn time. Holding times are exponential with the state's total
/// rate, measured in units of `1/M`; the horizon is `walk_length` such units.
/// A state with no positive moves is returned as soon as it is reached.
pub fn chain_walk<S, G, R>(
    ledger: &Ledger<S>,
    graph: &G,
    params: &PolicyParams<S>,
    rng: &mut R,
) -> Result<VertexId>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
    R: Rng + ?Sized,
{
    let root = graph.root();
    let m = ledger.max_positive().to_f64_lossy();
    if m == 0.0 {
        return Ok(root);
    }
    let positive_keys = match ledger.mode() {
        super::LedgerMode::PerEdge => ledger
            .edge_entries()
            .values()
            .flat_map(|r| r.values())
            .filter(|e| e.biased > S::zero())
            .count(),
        super::LedgerMode::PerColor => ledger
            .color_entries()
            .values()
            .filter(|e| e.biased > S::zero())
            .count(),
    };
    let horizon = params.walk_length.unwrap_or(10 * positive_keys + 100) as f64 / m;
    let stop = rng.random::<f64>() * horizon;
    let mut clock = 0.0;
    let mut state = root.clone();
    let mut cache: BTreeMap<VertexId, Vec<(VertexId, f64)>> = BTreeMap::new();
    loop {
        if !cache.contains_key(&state) {
            let (moves, _) = redirected_moves(ledger, graph, params.level_cap, &state, &root)?;
            let moves = moves
                .into_iter()
                .map(|(t, r)| (t, r.to_f64_lossy()))
                .collect();
            cache.insert(state.clone(), moves);
        }
        let moves = &cache[&state];
        let out: f64 = moves.iter().map(|(_, r)| r).sum();
        if out <= 0.0 {
            return Ok(state);
        }
        let u: f64 = rng.random();
        clock += -(1.0 - u).ln() / out;
        if clock > stop {
            return Ok(state);
        }
        let mut pick = rng.random::<f64>() * out;
        let mut next = &moves[moves.len() - 1].0;
        for (t, r) in moves {
            if pick < *r {
                next = t;
                break;
            }
            pick -= r;
        }
        state = next.clone();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ExplicitGraph, Hypercube};
    use crate::regret::ledger::{entry, LedgerMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(l: LevelCap) -> PolicyParams<f64> {
        PolicyParams::new(l, 0.0)
    }

    #[test]
    fn absorbing_two_vertex_chain() {
        let g = ExplicitGraph::unit(2, &[(0, 1)]).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        l.set_edge(g.vertex(0), g.vertex(1), entry(2.0));
        let d = stationary_distribution(&l, &g, &params(LevelCap::Bounded(1))).unwrap();
        assert_eq!(d.probs().len(), 1);
        assert_eq!(d.prob(&g.vertex(1)), 1.0);
        assert!(d.is_degenerate());
    }

    #[test]
    fn all_nonpositive_is_degenerate_root() {
        let g = ExplicitGraph::unit(2, &[(0, 1)]).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        l.set_edge(g.vertex(0), g.vertex(1), entry(-1.0));
        let d = stationary_distribution(&l, &g, &params(LevelCap::Unbounded)).unwrap();
        assert_eq!(d, Distribution::point_mass(g.root(), true));
    }

    #[test]
    fn three_cycle_is_uniform() {
        let g = ExplicitGraph::unit(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            l.set_edge(g.vertex(a), g.vertex(b), entry(1.0));
        }
        let d = stationary_distribution(&l, &g, &params(LevelCap::Bounded(2))).unwrap();
        for i in 0..3 {
            assert!((d.prob(&g.vertex(i)) - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(!d.is_degenerate());
    }

    #[test]
    fn redirect_at_level_cap() {
        // Path 0 -> 1 -> 2 with L = 1: the move into level 2 returns to the root.
        let g = ExplicitGraph::unit(3, &[(0, 1), (1, 2)]).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        l.set_edge(g.vertex(0), g.vertex(1), entry(1.0));
        l.set_edge(g.vertex(1), g.vertex(2), entry(3.0));
        let d = stationary_distribution(&l, &g, &params(LevelCap::Bounded(1))).unwrap();
        assert!((d.prob(&g.vertex(0)) - 0.75).abs() < 1e-12);
        assert!((d.prob(&g.vertex(1)) - 0.25).abs() < 1e-12);
        assert_eq!(d.prob(&g.vertex(2)), 0.0);
    }

    #[test]
    fn capacity_error_names_count() {
        let g = ExplicitGraph::unit(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            l.set_edge(g.vertex(a), g.vertex(b), entry(1.0));
        }
        let mut p = params(LevelCap::Unbounded);
        p.active_set_cap = 2;
        assert_eq!(
            stationary_distribution(&l, &g, &p),
            Err(Error::Capacity { count: 3, cap: 2 })
        );
    }

    #[test]
    fn factored_marginals() {
        let mut l = Ledger::new(LedgerMode::PerColor, 0.0).unwrap();
        l.set_color(
            HypercubeColor {
                var: 0,
                value: true,
            }
            .encode(),
            entry(3.0),
        );
        l.set_color(
            HypercubeColor {
                var: 0,
                value: false,
            }
            .encode(),
            entry(1.0),
        );
        let m = factored_hypercube_distribution(&l, 1, LevelCap::Unbounded).unwrap();
        assert_eq!(m.p_on, vec![0.75]);

        let mut l = Ledger::new(LedgerMode::PerColor, 0.0).unwrap();
        l.set_color(
            HypercubeColor {
                var: 0,
                value: true,
            }
            .encode(),
            entry(1.0),
        );
        let m = factored_hypercube_distribution(&l, 2, LevelCap::Unbounded).unwrap();
        assert_eq!(m.p_on, vec![1.0, 0.0]);
        let joint = m.joint(&l).unwrap();
        let cube = Hypercube::new(2).unwrap();
        assert_eq!(joint.prob(&cube.parse("10").unwrap()), 1.0);
        assert!(joint.is_degenerate());

        assert!(matches!(
            factored_hypercube_distribution(&l, 2, LevelCap::Bounded(3)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn factored_matches_exact_on_three_cube() {
        let cube = Hypercube::new(3).unwrap();
        let mut l = Ledger::new(LedgerMode::PerColor, 0.0).unwrap();
        let vals = [
            (0, true, 2.0),
            (0, false, 1.0),
            (1, true, 0.5),
            (2, false, 4.0),
        ];
        for (var, value, r) in vals {
            l.set_color(HypercubeColor { var, value }.encode(), entry(r));
        }
        let exact = stationary_distribution(&l, &cube, &params(LevelCap::Unbounded)).unwrap();
        let joint = factored_hypercube_distribution(&l, 3, LevelCap::Unbounded)
            .unwrap()
            .joint(&l)
            .unwrap();
        for v in cube.all_vertices() {
            assert!((exact.prob(&v) - joint.prob(&v)).abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let g = ExplicitGraph::unit(2, &[(0, 1)]).unwrap();
        let mut w = BTreeMap::new();
        w.insert(g.vertex(0), 0.5);
        w.insert(g.vertex(1), 0.5);
        let d = Distribution::from_weights(w, false).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| d.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        let root = Distribution::<f64>::point_mass(g.root(), true);
        assert_eq!(root.sample(&mut ChaCha8Rng::seed_from_u64(1)), g.root());
        let m = ProductMarginals {
            p_on: vec![1.0, 0.0],
            degenerate: vec![false, true],
        };
        let cube = Hypercube::new(2).unwrap();
        assert_eq!(
            m.sample(&mut ChaCha8Rng::seed_from_u64(3)),
            cube.parse("10").unwrap()
        );
    }

    #[test]
    fn chain_walk_visits_cycle_states() {
        let g = ExplicitGraph::unit(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let mut l = Ledger::new(LedgerMode::PerEdge, 0.0).unwrap();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            l.set_edge(g.vertex(a), g.vertex(b), entry(1.0));
        }
        let mut p = params(LevelCap::Unbounded);
        p.walk_length = Some(2000);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 3];
        for _ in 0..3000 {
            let v = chain_walk(&l, &g, &p, &mut rng).unwrap();
            counts[g.index(&v).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 3000.0 - 1.0 / 3.0).abs() < 0.05, "{counts:?}");
        }
    }
}
