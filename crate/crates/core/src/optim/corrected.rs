use super::{check_finite, check_len, HyperParams};
use crate::error::{Error, Result};
use crate::taylor::{RankOne, Scaling, TaylorTerm, TermKind};

/// Staleness-corrected momentum.
///
/// Each step runs, in this order:
///
/// 1. `η' = βη + αβ ζᵀ μ̂_prev` (pre-update ζ, previous μ̂)
/// 2. `μ' = (1-β)g + βμ`
/// 3. `μ̂ = μ' - η'`
/// 4. `ζ' = (1-β)Z + βζ`
/// 5. `θ' = θ - α μ̂`
///
/// Coordinates outside the mask keep `η = 0` and therefore follow plain
/// momentum. ζ is always accumulated at full size.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectedState {
    pub mu: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta: TaylorTerm,
    pub mu_hat: Vec<f64>,
    /// `true` marks a corrected coordinate; `None` corrects everything.
    pub mask: Option<Vec<bool>>,
    /// Running average of squared gradients for [`step_scaled`](Self::step_scaled).
    pub second_moment: Option<Vec<f64>>,
    pub steps: usize,
}

enum TermInput<'a> {
    Dense(&'a TaylorTerm),
    Factors(&'a [RankOne], Scaling),
}

impl CorrectedState {
    pub fn new(n: usize, kind: TermKind) -> Self {
        CorrectedState {
            mu: vec![0.0; n],
            eta: vec![0.0; n],
            zeta: TaylorTerm::zeros(kind, n),
            mu_hat: vec![0.0; n],
            mask: None,
            second_moment: None,
            steps: 0,
        }
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        check_len("mask", mask.len(), self.mu.len())?;
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn with_second_moment(mut self) -> Self {
        self.second_moment = Some(vec![0.0; self.mu.len()]);
        self
    }

    pub fn kind(&self) -> TermKind {
        self.zeta.kind()
    }

    /// One corrected step with a dense minibatch Taylor term. Returns μ̂.
    pub fn step(
        &mut self,
        hp: &HyperParams,
        g: &[f64],
        z: &TaylorTerm,
        params: &mut [f64],
    ) -> Result<&[f64]> {
        self.advance(hp, g, TermInput::Dense(z), params, false)
    }

    /// Same as [`step`](Self::step), with the minibatch term given as its
    /// per-sample rank-one factors so the dense `Z` is never materialised.
    pub fn step_factored(
        &mut self,
        hp: &HyperParams,
        g: &[f64],
        factors: &[RankOne],
        scaling: Scaling,
        params: &mut [f64],
    ) -> Result<&[f64]> {
        self.advance(hp, g, TermInput::Factors(factors, scaling), params, false)
    }

    /// Corrected step followed by per-coordinate scaling:
    /// `v' = β₂v + (1-β₂)g²`, `θ' = θ - α μ̂ / sqrt(v' + ε)`.
    pub fn step_scaled(
        &mut self,
        hp: &HyperParams,
        g: &[f64],
        z: &TaylorTerm,
        params: &mut [f64],
    ) -> Result<&[f64]> {
        self.advance(hp, g, TermInput::Dense(z), params, true)
    }

    pub fn step_scaled_factored(
        &mut self,
        hp: &HyperParams,
        g: &[f64],
        factors: &[RankOne],
        scaling: Scaling,
        params: &mut [f64],
    ) -> Result<&[f64]> {
        self.advance(hp, g, TermInput::Factors(factors, scaling), params, true)
    }

    fn advance(
        &mut self,
        hp: &HyperParams,
        g: &[f64],
        z: TermInput<'_>,
        params: &mut [f64],
        scaled: bool,
    ) -> Result<&[f64]> {
        let n = self.mu.len();
        check_len("gradient", g.len(), n)?;
        check_len("parameters", params.len(), n)?;
        match &z {
            TermInput::Dense(t) => {
                if t.kind() != self.zeta.kind() || t.dim() != n {
                    return Err(Error::contract(format!(
                        "Taylor term {:?}/{} does not match state {:?}/{}",
                        t.kind(),
                        t.dim(),
                        self.zeta.kind(),
                        n
                    )));
                }
            }
            TermInput::Factors(fs, _) => {
                if fs.is_empty() {
                    return Err(Error::contract("no Taylor factors supplied"));
                }
                for f in fs.iter() {
                    check_len("Taylor factor", f.u.len(), n)?;
                    check_len("Taylor factor", f.v.len(), n)?;
                }
            }
        }
        if scaled && self.second_moment.is_none() {
            return Err(Error::contract("scaled step needs a second-moment buffer"));
        }
        check_finite(self.steps + 1, g)?;

        let (beta, alpha) = (hp.beta, hp.alpha);
        // ζᵀμ̂ uses the pre-update ζ and the previous μ̂.
        let correction = match z {
            TermInput::Dense(t) => {
                let c = self.zeta.transpose_mul(&self.mu_hat);
                self.zeta.blend(beta, 1.0 - beta, t)?;
                c
            }
            TermInput::Factors(fs, scaling) => {
                let per = match scaling {
                    Scaling::Sum => 1.0,
                    Scaling::Mean => 1.0 / fs.len() as f64,
                };
                self.zeta
                    .transpose_mul_then_decay_add(&self.mu_hat, beta, (1.0 - beta) * per, fs)
            }
        };
        for j in 0..n {
            let corrected = self.mask.as_ref().is_none_or(|m| m[j]);
            self.eta[j] = if corrected {
                beta * self.eta[j] + alpha * beta * correction[j]
            } else {
                0.0
            };
            self.mu[j] = (1.0 - beta) * g[j] + beta * self.mu[j];
            self.mu_hat[j] = self.mu[j] - self.eta[j];
        }

        if let (true, Some(v)) = (scaled, self.second_moment.as_mut()) {
            for j in 0..n {
                v[j] = hp.beta2 * v[j] + (1.0 - hp.beta2) * g[j] * g[j];
                params[j] -= alpha * self.mu_hat[j] / (v[j] + hp.epsilon).sqrt();
            }
        } else {
            for (p, m) in params.iter_mut().zip(&self.mu_hat) {
                *p -= alpha * m;
            }
        }
        self.steps += 1;
        Ok(&self.mu_hat)
    }
}
