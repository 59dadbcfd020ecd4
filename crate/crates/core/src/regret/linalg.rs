//! Dense Gaussian elimination for the small per-component systems of the
//! stationary solver.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Dense<S> {
    pub n: usize,
    pub a: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn zeros(n: usize) -> Self {
        Dense {
            n,
            a: vec![S::zero(); n * n],
        }
    }

    #[inline]
    pub fn at(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.a[i * self.n + j]
    }

    /// Solves `A x = b` in place with partial pivoting; `b` becomes `x`.
    pub fn solve(mut self, b: &mut [S]) -> Result<()> {
        let n = self.n;
        assert_eq!(b.len(), n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    self.a[r * n + col]
                        .abs()
                        .partial_cmp(&self.a[s * n + col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            let pv = self.a[pivot * n + col];
            if pv.abs() <= S::min_positive_value() || !pv.is_finite() {
                return Err(Error::Convergence {
                    residual: f64::INFINITY,
                    iterations: col,
                });
            }
            if pivot != col {
                for k in 0..n {
                    self.a.swap(pivot * n + k, col * n + k);
                }
                b.swap(pivot, col);
            }
            for r in col + 1..n {
                let f = self.a[r * n + col] / pv;
                if f == S::zero() {
                    continue;
                }
                for k in col..n {
                    let v = self.a[col * n + k];
                    self.a[r * n + k] -= f * v;
                }
                let bc = b[col];
                b[r] -= f * bc;
            }
        }
        for col in (0..n).rev() {
            let mut acc = b[col];
            for k in col + 1..n {
                acc -= self.a[col * n + k] * b[k];
            }
            b[col] = acc / self.a[col * n + col];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_pivoting_system() {
        let mut m = Dense::<f64>::zeros(3);
        let rows = [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [2.0, 0.0, 3.0]];
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                *m.at(i, j) = *v;
            }
        }
        let mut b = vec![7.0, 3.0, 11.0];
        m.solve(&mut b).unwrap();
        for (x, want) in b.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_an_error() {
        let m = Dense::<f64>::zeros(2);
        assert!(m.solve(&mut [1.0, 1.0]).is_err());
    }
}
