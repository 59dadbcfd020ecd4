use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::search::materialize;
use crate::graph::{LevelCap, LocalityGraph};
use crate::regret::{Distribution, Ledger, LedgerMode};
use crate::scalar::Scalar;

const MAX_STATES: usize = 64;
const DOUBLINGS: usize = 50;

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..n {
                    c[i][j] += aik * b[k][j];
                }
            }
        }
    }
    c
}

fn normalize_rows(m: &mut [Vec<f64>]) {
    for row in m {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
}

/// Cesàro limit `lim (1/N) Σ_{k<N} e_start Pᵏ` of a row-stochastic matrix.
///
/// Uses `C_{2N} = C_N (I + P^N) / 2` from `C_1 = I`, so after 50 doublings
/// the average runs over `2^50` powers and the transient error is far below
/// `1e-12`.
pub fn dense_limit_oracle(p: &[Vec<f64>], start: usize) -> Result<Vec<f64>> {
    let n = p.len();
    if n == 0 || n > MAX_STATES || start >= n {
        return Err(Error::InvalidParameter(format!(
            "dense oracle takes 1..={MAX_STATES} states, got {n} (start {start})"
        )));
    }
    for (i, row) in p.iter().enumerate() {
        if row.len() != n
            || row.iter().any(|x| !(*x >= -1e-15))
            || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidParameter(format!(
                "row {i} is not a probability vector"
            )));
        }
    }
    let ident: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect())
        .collect();
    let mut c = ident.clone();
    let mut pk = p.to_vec();
    for _ in 0..DOUBLINGS {
        let mut half = ident.clone();
        for i in 0..n {
            for j in 0..n {
                half[i][j] = 0.5 * (half[i][j] + pk[i][j]);
            }
        }
        c = matmul(&c, &half);
        pk = matmul(&pk, &pk);
        // Row sums drift by a factor of two per squaring without this.
        normalize_rows(&mut c);
        normalize_rows(&mut pk);
    }
    Ok(c[start].clone())
}

/// The policy an exact solver should return, rebuilt from scratch: the whole
/// graph is materialized, levels come from its own BFS, and the limit is
/// taken by [`dense_limit_oracle`] on `P = I + Q/M'` with
/// `M' = max(M, largest row rate)`. Mass on states without positive
/// out-regret then wins outright, as in the solver.
pub fn dense_reference<S, G>(
    ledger: &Ledger<S>,
    graph: &G,
    cap: LevelCap,
) -> Result<Distribution<f64>>
where
    S: Scalar,
    G: LocalityGraph + ?Sized,
{
    let m = materialize(graph, MAX_STATES)?;
    let root = *m
        .index
        .get(&graph.root())
        .expect("materialized from the root");
    let levels = m.bfs_levels();
    let n = m.len();
    let mut q = vec![vec![0.0; n]; n];
    let mut edge_out = vec![0.0; n];
    for i in 0..n {
        if !cap.admits(levels[i]) {
            continue;
        }
        for (j, e) in &m.out[i] {
            let r = match ledger.mode() {
                LedgerMode::PerEdge => ledger.edge(&m.vertices[i], &m.vertices[*j]).biased,
                LedgerMode::PerColor => ledger.color(&e.color).biased,
            }
            .to_f64_lossy();
            if r <= 0.0 {
                continue;
            }
            edge_out[i] += r;
            let target = if cap.admits(levels[*j]) { *j } else { root };
            if target != i {
                q[i][target] += r;
            }
        }
    }
    let row_max = q.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let m_prime = ledger.max_positive().to_f64_lossy().max(row_max);
    if m_prime == 0.0 {
        return Ok(Distribution::point_mass(graph.root(), true));
    }
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        let out: f64 = q[i].iter().sum();
        for j in 0..n {
            p[i][j] = q[i][j] / m_prime;
        }
        p[i][i] += 1.0 - out / m_prime;
    }
    let pi = dense_limit_oracle(&p, root)?;
    let absorbed: f64 = (0..n).filter(|&i| edge_out[i] == 0.0).map(|i| pi[i]).sum();
    let keep_absorbed = absorbed > 1e-9;
    let weights: BTreeMap<_, _> = (0..n)
        .filter(|&i| pi[i] > 1e-14 && (edge_out[i] == 0.0) == keep_absorbed)
        .map(|i| (m.vertices[i].clone(), pi[i]))
        .collect();
    Distribution::from_weights(weights, keep_absorbed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_chain() {
        let p = vec![vec![1.0, 0.0], vec![0.5, 0.5]];
        assert_eq!(dense_limit_oracle(&p, 0).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn two_state_closed_form() {
        let (a, b) = (0.3, 0.1);
        let p = vec![vec![1.0 - a, a], vec![b, 1.0 - b]];
        let pi = dense_limit_oracle(&p, 0).unwrap();
        assert!((pi[0] - b / (a + b)).abs() < 1e-12);
        assert!((pi[1] - a / (a + b)).abs() < 1e-12);
    }

    #[test]
    fn periodic_chain_averages() {
        let p = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let pi = dense_limit_oracle(&p, 0).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matches_long_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 8;
        let mut p = vec![vec![0.0; n]; n];
        for (i, row) in p.iter_mut().enumerate() {
            // A positive cycle keeps the chain irreducible.
            row[(i + 1) % n] += 0.1;
            for x in row.iter_mut() {
                if rng.random_bool(0.5) {
                    *x += rng.random::<f64>();
                }
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
        let pi = dense_limit_oracle(&p, 0).unwrap();
        let steps = 10_000_000;
        let mut visits = vec![0usize; n];
        let mut s = 0;
        for _ in 0..steps {
            visits[s] += 1;
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut next = n - 1;
            for (j, x) in p[s].iter().enumerate() {
                acc += x;
                if u < acc {
                    next = j;
                    break;
                }
            }
            s = next;
        }
        let l1: f64 = (0..n)
            .map(|i| (visits[i] as f64 / steps as f64 - pi[i]).abs())
            .sum();
        assert!(l1 < 1e-3, "L1 {l1}");
    }

    #[test]
    fn rejects_oversized_and_substochastic() {
        assert!(dense_limit_oracle(&[vec![0.5]], 0).is_err());
        assert!(dense_limit_oracle(&vec![vec![0.0; 65]; 65], 0).is_err());
    }
}
