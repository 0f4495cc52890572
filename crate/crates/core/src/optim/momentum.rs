use super::{check_finite, check_len, HyperParams};
use crate::error::Result;

/// Dampened heavy-ball momentum: `μ' = βμ + (1-β)g`, `θ' = θ - αμ'`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumState {
    pub mu: Vec<f64>,
    pub steps: usize,
}

impl MomentumState {
    pub fn new(n: usize) -> Self {
        MomentumState {
            mu: vec![0.0; n],
            steps: 0,
        }
    }

    pub fn step(&mut self, hp: &HyperParams, g: &[f64], params: &mut [f64]) -> Result<()> {
        check_len("gradient", g.len(), self.mu.len())?;
        check_len("parameters", params.len(), self.mu.len())?;
        check_finite(self.steps + 1, g)?;
        for ((m, &gi), p) in self.mu.iter_mut().zip(g).zip(params.iter_mut()) {
            *m = hp.beta * *m + (1.0 - hp.beta) * gi;
            *p -= hp.alpha * *m;
        }
        self.steps += 1;
        Ok(())
    }
}
