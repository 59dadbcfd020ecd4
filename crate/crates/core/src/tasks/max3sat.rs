use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Task;
use crate::error::{Error, Result};
use crate::graph::hypercube::get_bit;
use crate::graph::VertexId;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn holds(&self, value: bool) -> bool {
        value == self.positive
    }
}

/// A disjunction of literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause { literals }
    }

    /// Parses DIMACS-style signed, 1-based literals: `[1, -2, 3]` is `x1 ∨ ¬x2 ∨ x3`.
    pub fn from_signed(lits: &[i64]) -> Result<Self> {
        lits.iter()
            .map(|&l| {
                if l == 0 {
                    Err(Error::InvalidParameter("literal 0".into()))
                } else {
                    Ok(Literal {
                        var: (l.unsigned_abs() - 1) as usize,
                        positive: l > 0,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Clause::new)
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.literals.iter().any(|l| l.holds(assignment[l.var]))
    }

    pub fn satisfied_by_vertex(&self, v: &VertexId) -> bool {
        self.literals.iter().any(|l| l.holds(get_bit(v, l.var)))
    }
}

/// Random Max-3SAT: a fixed set of clauses over `n` variables; each step one
/// clause is drawn uniformly, and an assignment earns 1 if it satisfies it.
#[derive(Clone, Debug)]
pub struct Max3Sat {
    n: usize,
    clauses: Vec<Clause>,
    rng: ChaCha8Rng,
    current: Option<usize>,
}

/// `m` clauses of three distinct variables with uniform polarities.
pub fn make_max3sat(n: usize, m: usize, mut rng: ChaCha8Rng) -> Result<Max3Sat> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "Max-3SAT needs n >= 3, got {n}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidParameter(
            "Max-3SAT needs at least one clause".into(),
        ));
    }
    let clauses = (0..m)
        .map(|_| {
            let vars = sample(&mut rng, n, 3);
            Clause::new(
                vars.iter()
                    .map(|var| Literal {
                        var,
                        positive: rng.random(),
                    })
                    .collect(),
            )
        })
        .collect();
    Ok(Max3Sat {
        n,
        clauses,
        rng,
        current: None,
    })
}

impl Max3Sat {
    pub fn from_clauses(n: usize, clauses: Vec<Clause>, rng: ChaCha8Rng) -> Result<Self> {
        for c in &clauses {
            if c.literals.iter().any(|l| l.var >= n) {
                return Err(Error::InvalidParameter(format!(
                    "clause {c:?} mentions a variable >= {n}"
                )));
            }
        }
        if clauses.is_empty() {
            return Err(Error::InvalidParameter("no clauses".into()));
        }
        Ok(Max3Sat {
            n,
            clauses,
            rng,
            current: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn current(&self) -> Option<&Clause> {
        self.current.map(|i| &self.clauses[i])
    }

    /// Fraction of all clauses left unsatisfied by `assignment`.
    pub fn unsatisfied_fraction(&self, assignment: &[bool]) -> f64 {
        let bad = self
            .clauses
            .iter()
            .filter(|c| !c.satisfied_by(assignment))
            .count();
        bad as f64 / self.clauses.len() as f64
    }

    fn check(&self, v: &VertexId) -> Result<()> {
        if v.len() != self.n.div_ceil(8) {
            return Err(Error::Decode {
                vertex: v.clone(),
                reason: format!("not an assignment to {} variables", self.n),
            });
        }
        Ok(())
    }
}

impl<S: Scalar> Task<S> for Max3Sat {
    fn name(&self) -> String {
        format!("max3sat(n={},m={})", self.n, self.clauses.len())
    }

    fn utility_span(&self) -> f64 {
        1.0
    }

    fn advance(&mut self, _t: usize) -> Result<()> {
        self.current = Some(self.rng.random_range(0..self.clauses.len()));
        Ok(())
    }

    fn utility(&self, action: &VertexId) -> Result<S> {
        self.check(action)?;
        let c = self
            .current()
            .ok_or_else(|| Error::Input("no clause drawn yet".into()))?;
        Ok(if c.satisfied_by_vertex(action) {
            S::one()
        } else {
            S::zero()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Hypercube, LocalityGraph};
    use rand::SeedableRng;

    #[test]
    fn clause_examples() {
        let c = Clause::from_signed(&[1, -2, 3]).unwrap();
        assert!(c.satisfied_by(&[false; 3]));
        let d = Clause::from_signed(&[1, 2, 3]).unwrap();
        assert!(!d.satisfied_by(&[false; 3]));
    }

    #[test]
    fn utility_follows_drawn_clause() {
        let cube = Hypercube::new(3).unwrap();
        let clauses = vec![Clause::from_signed(&[1, 2, 3]).unwrap()];
        let mut task = Max3Sat::from_clauses(3, clauses, ChaCha8Rng::seed_from_u64(0)).unwrap();
        Task::<f64>::advance(&mut task, 1).unwrap();
        assert_eq!(Task::<f64>::utility(&task, &cube.root()).unwrap(), 0.0);
        assert_eq!(
            Task::<f64>::utility(&task, &cube.parse("010").unwrap()).unwrap(),
            1.0
        );
    }

    #[test]
    fn random_assignment_satisfies_seven_eighths() {
        let task = make_max3sat(20, 201, ChaCha8Rng::seed_from_u64(3)).unwrap();
        for c in task.clauses() {
            assert_eq!(c.literals.len(), 3);
            let mut vars: Vec<usize> = c.literals.iter().map(|l| l.var).collect();
            vars.dedup();
            vars.sort();
            vars.dedup();
            assert_eq!(vars.len(), 3);
        }
        // Exactly one of the 8 polarity patterns on a clause's variables fails it.
        let c = &task.clauses()[0];
        let mut sat = 0;
        for mask in 0..8u32 {
            let mut a = vec![false; 20];
            for (k, l) in c.literals.iter().enumerate() {
                a[l.var] = mask >> k & 1 == 1;
            }
            sat += c.satisfied_by(&a) as u32;
        }
        assert_eq!(sat, 7);
    }

    #[test]
    fn rejects_small_n() {
        assert!(make_max3sat(2, 5, ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
