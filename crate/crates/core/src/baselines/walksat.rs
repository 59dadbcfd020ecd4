use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tasks::Clause;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkSatParams {
    pub noise: f64,
    pub max_flips: usize,
    pub restarts: usize,
}

impl Default for WalkSatParams {
    fn default() -> Self {
        WalkSatParams {
            noise: 0.5,
            max_flips: 100_000,
            restarts: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WalkSatResult {
    pub assignment: Vec<bool>,
    pub unsatisfied_fraction: f64,
    /// Unsatisfied fraction of the first random assignment.
    pub initial_fraction: f64,
}

struct State {
    // (clause, polarity) for every occurrence of each variable.
    occurs: Vec<Vec<(usize, bool)>>,
    a: Vec<bool>,
    true_count: Vec<usize>,
    unsat: Vec<usize>,
    // Position of each clause in `unsat`, or usize::MAX.
    pos: Vec<usize>,
}

impl State {
    fn new(clauses: &[Clause], occurs: Vec<Vec<(usize, bool)>>, a: Vec<bool>) -> Self {
        let mut s = State {
            occurs,
            a,
            true_count: vec![0; clauses.len()],
            unsat: Vec::new(),
            pos: vec![usize::MAX; clauses.len()],
        };
        for (ci, c) in clauses.iter().enumerate() {
            s.true_count[ci] = c.literals.iter().filter(|l| l.holds(s.a[l.var])).count();
            if s.true_count[ci] == 0 {
                s.mark(ci);
            }
        }
        s
    }

    fn mark(&mut self, ci: usize) {
        self.pos[ci] = self.unsat.len();
        self.unsat.push(ci);
    }

    fn unmark(&mut self, ci: usize) {
        let p = self.pos[ci];
        let last = self.unsat.pop().expect("clause was marked");
        if last != ci {
            self.unsat[p] = last;
            self.pos[last] = p;
        }
        self.pos[ci] = usize::MAX;
    }

    /// Satisfied clauses that flipping `var` would break.
    fn breaks(&self, var: usize) -> usize {
        let v = self.a[var];
        self.occurs[var]
            .iter()
            .filter(|&&(ci, pos)| pos == v && self.true_count[ci] == 1)
            .count()
    }

    fn flip(&mut self, var: usize) {
        self.a[var] = !self.a[var];
        let v = self.a[var];
        for k in 0..self.occurs[var].len() {
            let (ci, pos) = self.occurs[var][k];
            if pos == v {
                self.true_count[ci] += 1;
                if self.true_count[ci] == 1 {
                    self.unmark(ci);
                }
            } else {
                self.true_count[ci] -= 1;
                if self.true_count[ci] == 0 {
                    self.mark(ci);
                }
            }
        }
    }
}

/// Offline WalkSAT over `n` variables, keeping the best assignment seen
/// across all restarts.
pub fn walksat_offline<R: Rng + ?Sized>(
    n: usize,
    clauses: &[Clause],
    params: WalkSatParams,
    rng: &mut R,
) -> Result<WalkSatResult> {
    if clauses.is_empty() {
        return Err(Error::InvalidParameter("no clauses".into()));
    }
    if !(0.0..=1.0).contains(&params.noise) || params.restarts == 0 {
        return Err(Error::InvalidParameter(
            "walksat needs noise in [0, 1] and at least one restart".into(),
        ));
    }
    let mut occurs = vec![Vec::new(); n];
    for (ci, c) in clauses.iter().enumerate() {
        if c.literals.is_empty() {
            return Err(Error::InvalidParameter(format!("clause {ci} is empty")));
        }
        for l in &c.literals {
            if l.var >= n {
                return Err(Error::InvalidParameter(format!(
                    "clause {ci} mentions variable {} >= {n}",
                    l.var
                )));
            }
            occurs[l.var].push((ci, l.positive));
        }
    }
    let m = clauses.len() as f64;
    let mut best: Option<(usize, Vec<bool>)> = None;
    let mut initial = None;
    for _ in 0..params.restarts {
        let a: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let mut s = State::new(clauses, occurs.clone(), a);
        initial.get_or_insert(s.unsat.len());
        if best.as_ref().is_none_or(|(b, _)| s.unsat.len() < *b) {
            best = Some((s.unsat.len(), s.a.clone()));
        }
        for _ in 0..params.max_flips {
            if s.unsat.is_empty() {
                break;
            }
            let ci = s.unsat[rng.random_range(0..s.unsat.len())];
            let lits = &clauses[ci].literals;
            let var = if rng.random_bool(params.noise) {
                lits.choose(rng).expect("nonempty clause").var
            } else {
                let min = lits
                    .iter()
                    .map(|l| s.breaks(l.var))
                    .min()
                    .expect("nonempty clause");
                let cands: Vec<usize> = lits
                    .iter()
                    .map(|l| l.var)
                    .filter(|&v| s.breaks(v) == min)
                    .collect();
                *cands.choose(rng).expect("some literal attains the minimum")
            };
            s.flip(var);
            if s.unsat.len() < best.as_ref().map_or(usize::MAX, |b| b.0) {
                best = Some((s.unsat.len(), s.a.clone()));
            }
        }
        if best.as_ref().is_some_and(|b| b.0 == 0) {
            break;
        }
    }
    let (b, assignment) = best.expect("at least one restart");
    Ok(WalkSatResult {
        assignment,
        unsatisfied_fraction: b as f64 / m,
        initial_fraction: initial.unwrap_or(0) as f64 / m,
    })
}
