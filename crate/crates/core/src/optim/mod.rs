//! Momentum optimizers: plain dampened momentum, staleness-corrected
//! momentum (full or diagonal ζ, optional layer mask, optional
//! second-moment scaling) and the exact-recomputation oracle.

mod corrected;
mod mask;
mod momentum;
mod oracle;

pub use corrected::CorrectedState;
pub use mask::{make_mask, LayerSelector};
pub use momentum::MomentumState;
pub use oracle::OracleState;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperParams {
    /// Step size.
    pub alpha: f64,
    /// Momentum factor.
    pub beta: f64,
    /// MDP discount, carried for TD losses.
    pub gamma: f64,
    /// Second-moment decay of the scaled variant.
    pub beta2: f64,
    /// Denominator offset of the scaled variant.
    pub epsilon: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            alpha: 0.1,
            beta: 0.9,
            gamma: 0.99,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl HyperParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        HyperParams {
            alpha,
            beta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        // alpha = 0 is accepted: it is the "no parameter motion" degenerate case.
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!(
                "alpha must be non-negative, got {}",
                self.alpha
            )));
        }
        for (name, v) in [
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("beta2", self.beta2),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// `ceil(2 * per_step / (1 - beta))`: the number of recent steps (or, with
/// `per_step = n_mb`, examples) whose weight in the moving average matters.
pub fn effective_horizon(beta: f64, per_step: usize) -> usize {
    let h = 2.0 * per_step as f64 / (1.0 - beta);
    // 2/(1-0.9) evaluates to 20.000000000000004
    (h - 1e-9 * h.max(1.0)).ceil().max(1.0) as usize
}

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::contract(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

pub(crate) fn check_finite(step: usize, g: &[f64]) -> Result<()> {
    if let Some(j) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::Diverged {
            step,
            reason: format!("non-finite gradient entry {j} = {}", g[j]),
        });
    }
    Ok(())
}
