use crate::error::{Error, Result};

/// Winnow2 with multiplicative promotion and demotion.
#[derive(Clone, Debug, PartialEq)]
pub struct WinnowState {
    pub weights: Vec<f64>,
    pub threshold: f64,
    pub alpha: f64,
}

impl WinnowState {
    /// Unit weights, `θ = n`, `α = 2`.
    pub fn new(n: usize) -> Self {
        WinnowState {
            weights: vec![1.0; n],
            threshold: n as f64,
            alpha: 2.0,
        }
    }

    pub fn with_params(weights: Vec<f64>, threshold: f64, alpha: f64) -> Result<Self> {
        if weights.iter().any(|w| !(*w > 0.0)) || !(threshold > 0.0) || !(alpha > 1.0) {
            return Err(Error::InvalidParameter(
                "winnow needs positive weights, θ > 0 and α > 1".into(),
            ));
        }
        Ok(WinnowState {
            weights,
            threshold,
            alpha,
        })
    }

    pub fn predict(&self, x: &[bool]) -> bool {
        let s: f64 = self
            .weights
            .iter()
            .zip(x)
            .filter(|(_, xi)| **xi)
            .map(|(w, _)| w)
            .sum();
        s >= self.threshold
    }

    /// Predicts on `x`, then updates on the revealed label. Returns the prediction.
    pub fn step(&mut self, x: &[bool], y: bool) -> bool {
        let p = self.predict(x);
        if p != y {
            let factor = if y { self.alpha } else { 1.0 / self.alpha };
            for (w, _) in self.weights.iter_mut().zip(x).filter(|(_, xi)| **xi) {
                *w *= factor;
            }
        }
        p
    }
}

/// Functional form of [`WinnowState::step`].
pub fn winnow2_step(state: &WinnowState, x: &[bool], y: bool) -> (bool, WinnowState) {
    let mut next = state.clone();
    let p = next.step(x, y);
    (p, next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_and_demotion() {
        let s = WinnowState::new(2);
        let (p, s2) = winnow2_step(&s, &[true, true], false);
        assert!(p);
        assert_eq!(s2.weights, vec![0.5, 0.5]);
        let (p, s3) = winnow2_step(&s2, &[true, false], true);
        assert!(!p);
        assert_eq!(s3.weights, vec![1.0, 0.5]);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(WinnowState::with_params(vec![1.0], 1.0, 1.0).is_err());
        assert!(WinnowState::with_params(vec![0.0], 1.0, 2.0).is_err());
    }
}
