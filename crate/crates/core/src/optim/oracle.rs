use std::collections::VecDeque;

use super::{check_finite, check_len, effective_horizon, HyperParams};
use crate::error::Result;

/// Exact-recomputation momentum over a sliding window.
///
/// Keeps the raw inputs of the last `h = ceil(2/(1-β))` minibatches and, at
/// every step, recomputes all of their gradients at the current (pre-update)
/// parameters: `μ* = (1-β) Σ β^age g_i(θ)`, newest age 0. A partially filled
/// window is not renormalised.
#[derive(Clone, Debug)]
pub struct OracleState<B> {
    window: VecDeque<B>,
    horizon: usize,
    pub steps: usize,
}

impl<B> OracleState<B> {
    pub fn new(beta: f64) -> Self {
        Self::with_horizon(effective_horizon(beta, 1))
    }

    pub fn with_horizon(horizon: usize) -> Self {
        OracleState {
            window: VecDeque::with_capacity(horizon + 1),
            horizon: horizon.max(1),
            steps: 0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// Oldest first.
    pub fn window(&self) -> impl Iterator<Item = &B> {
        self.window.iter()
    }

    /// Pushes `batch`, recomputes μ* at `params` and applies `θ' = θ - αμ*`.
    pub fn step<F>(
        &mut self,
        hp: &HyperParams,
        batch: B,
        mut grad_fn: F,
        params: &mut [f64],
    ) -> Result<Vec<f64>>
    where
        F: FnMut(&B, &[f64]) -> Vec<f64>,
    {
        self.window.push_back(batch);
        while self.window.len() > self.horizon {
            self.window.pop_front();
        }
        // Same recursion as plain momentum, oldest to newest, so a frozen θ
        // reproduces μ bit for bit.
        let mut mu_star = vec![0.0; params.len()];
        for b in &self.window {
            let g = grad_fn(b, params);
            check_len("oracle gradient", g.len(), params.len())?;
            check_finite(self.steps + 1, &g)?;
            for (m, gi) in mu_star.iter_mut().zip(&g) {
                *m = hp.beta * *m + (1.0 - hp.beta) * gi;
            }
        }
        for (p, m) in params.iter_mut().zip(&mu_star) {
            *p -= hp.alpha * m;
        }
        self.steps += 1;
        Ok(mu_star)
    }
}
