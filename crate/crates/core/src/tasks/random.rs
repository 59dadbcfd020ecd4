use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Task;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::scalar::Scalar;

/// Fresh i.i.d. uniform `[0, 1)` utilities for every (step, vertex) pair,
/// derived by hashing a per-step key with the vertex bytes.
#[derive(Clone, Debug)]
pub struct RandomUtilityTask {
    rng: ChaCha8Rng,
    key: Option<u64>,
}

impl RandomUtilityTask {
    pub fn new(rng: ChaCha8Rng) -> Self {
        RandomUtilityTask { rng, key: None }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(key: u64, v: &VertexId) -> f64 {
    let mut h = splitmix(key ^ v.len() as u64);
    for chunk in v.as_bytes().chunks(8) {
        let mut b = [0u8; 8];
        b[..chunk.len()].copy_from_slice(chunk);
        h = splitmix(h ^ u64::from_le_bytes(b));
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}

impl<S: Scalar> Task<S> for RandomUtilityTask {
    fn name(&self) -> String {
        "random-utilities".into()
    }

    fn utility_span(&self) -> f64 {
        1.0
    }

    fn advance(&mut self, _t: usize) -> Result<()> {
        self.key = Some(self.rng.random());
        Ok(())
    }

    fn utility(&self, action: &VertexId) -> Result<S> {
        let key = self
            .key
            .ok_or_else(|| Error::Input("no step drawn yet".into()))?;
        Ok(S::of(mix(key, action)))
    }
}
