//! Taylor terms: the first-order sensitivity of a per-step gradient to a
//! parameter displacement, `g(θ + Δ) ≈ g(θ) + Zᵀ Δ`.
//!
//! Second derivatives of the model are dropped everywhere, so each
//! per-sample term is a rank-one outer product `u ⊗ v` with `Z[j][k] = u_j v_k`.
//! For regression `u = v = ∇f(x)`; for TD targets `u` subtracts the
//! discounted gradient of the bootstrap value.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TermKind {
    Full,
    Diagonal,
}

/// How per-sample quantities combine into a minibatch quantity. Must match
/// the scaling used for the minibatch gradient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scaling {
    Sum,
    #[default]
    Mean,
}

/// A dense `n x n` Taylor term (row-major) or its diagonal.
#[derive(Clone, Debug, PartialEq)]
pub enum TaylorTerm {
    Full { n: usize, data: Vec<f64> },
    Diagonal(Vec<f64>),
}

impl TaylorTerm {
    pub fn zeros(kind: TermKind, n: usize) -> Self {
        match kind {
            TermKind::Full => TaylorTerm::Full {
                n,
                data: vec![0.0; n * n],
            },
            TermKind::Diagonal => TaylorTerm::Diagonal(vec![0.0; n]),
        }
    }

    pub fn kind(&self) -> TermKind {
        match self {
            TaylorTerm::Full { .. } => TermKind::Full,
            TaylorTerm::Diagonal(_) => TermKind::Diagonal,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TaylorTerm::Full { n, .. } => *n,
            TaylorTerm::Diagonal(d) => d.len(),
        }
    }

    /// Entry `(j, k)`; off-diagonal entries of a diagonal term are zero.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        match self {
            TaylorTerm::Full { n, data } => data[j * n + k],
            TaylorTerm::Diagonal(d) if j == k => d[j],
            TaylorTerm::Diagonal(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        match self {
            TaylorTerm::Full { n, data } => (0..*n).map(|j| data[j * n + j]).collect(),
            TaylorTerm::Diagonal(d) => d.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            TaylorTerm::Full { data, .. } => data.iter().all(|v| v.is_finite()),
            TaylorTerm::Diagonal(d) => d.iter().all(|v| v.is_finite()),
        }
    }

    fn same_shape(&self, other: &TaylorTerm) -> Result<()> {
        if self.kind() != other.kind() || self.dim() != other.dim() {
            return Err(Error::contract(format!(
                "Taylor term mismatch: {:?}/{} vs {:?}/{}",
                self.kind(),
                self.dim(),
                other.kind(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// `self += scale * (u ⊗ v)`, keeping only the diagonal for diagonal terms.
    pub fn add_outer(&mut self, u: &[f64], v: &[f64], scale: f64) {
        match self {
            TaylorTerm::Full { n, data } => {
                for (row, &uj) in data.chunks_exact_mut(*n).zip(u) {
                    let a = scale * uj;
                    if a == 0.0 {
                        continue;
                    }
                    for (z, &vk) in row.iter_mut().zip(v) {
                        *z += a * vk;
                    }
                }
            }
            TaylorTerm::Diagonal(d) => {
                for ((z, &uj), &vj) in d.iter_mut().zip(u).zip(v) {
                    *z += scale * uj * vj;
                }
            }
        }
    }

    /// `self = decay * self + weight * other`.
    pub fn blend(&mut self, decay: f64, weight: f64, other: &TaylorTerm) -> Result<()> {
        self.same_shape(other)?;
        let (dst, src) = match (self, other) {
            (TaylorTerm::Full { data: a, .. }, TaylorTerm::Full { data: b, .. }) => (a, b),
            (TaylorTerm::Diagonal(a), TaylorTerm::Diagonal(b)) => (a, b),
            _ => unreachable!(),
        };
        for (a, b) in dst.iter_mut().zip(src) {
            *a = decay * *a + weight * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        let data = match self {
            TaylorTerm::Full { data, .. } => data,
            TaylorTerm::Diagonal(d) => d,
        };
        data.iter_mut().for_each(|v| *v *= factor);
    }

    /// `Zᵀ x`.
    pub fn transpose_mul(&self, x: &[f64]) -> Vec<f64> {
        match self {
            TaylorTerm::Full { n, data } => {
                let mut out = vec![0.0; *n];
                for (row, &xj) in data.chunks_exact(*n).zip(x) {
                    if xj == 0.0 {
                        continue;
                    }
                    for (o, &z) in out.iter_mut().zip(row) {
                        *o += z * xj;
                    }
                }
                out
            }
            TaylorTerm::Diagonal(d) => d.iter().zip(x).map(|(z, xi)| z * xi).collect(),
        }
    }

    /// Returns `Zᵀ x` for the current term, then replaces it with
    /// `decay * Z + weight * Σ u_i ⊗ v_i`, in a single pass over the storage.
    /// Rounding matches `scale(decay)` followed by one `add_outer` per factor.
    pub fn transpose_mul_then_decay_add(
        &mut self,
        x: &[f64],
        decay: f64,
        weight: f64,
        factors: &[RankOne],
    ) -> Vec<f64> {
        match self {
            TaylorTerm::Full { n, data } => {
                let mut out = vec![0.0; *n];
                for (j, row) in data.chunks_exact_mut(*n).enumerate() {
                    let xj = x[j];
                    for (o, z) in out.iter_mut().zip(row.iter_mut()) {
                        *o += *z * xj;
                        *z *= decay;
                    }
                    for f in factors {
                        let a = weight * f.u[j];
                        if a == 0.0 {
                            continue;
                        }
                        for (z, &vk) in row.iter_mut().zip(&f.v) {
                            *z += a * vk;
                        }
                    }
                }
                out
            }
            TaylorTerm::Diagonal(d) => {
                let out = d.iter().zip(x).map(|(z, xi)| z * xi).collect();
                for (j, z) in d.iter_mut().enumerate() {
                    *z *= decay;
                    for f in factors {
                        *z += weight * f.u[j] * f.v[j];
                    }
                }
                out
            }
        }
    }

    /// Zeroes every off-diagonal entry of a full term in place.
    pub fn zero_off_diagonal(&mut self) {
        if let TaylorTerm::Full { n, data } = self {
            for j in 0..*n {
                for k in 0..*n {
                    if j != k {
                        data[j * *n + k] = 0.0;
                    }
                }
            }
        }
    }
}

/// Factored per-sample Taylor term `u ⊗ v`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOne {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl RankOne {
    pub fn to_term(&self, kind: TermKind) -> TaylorTerm {
        let mut t = TaylorTerm::zeros(kind, self.v.len());
        t.add_outer(&self.u, &self.v, 1.0);
        t
    }

    /// `(u ⊗ v)ᵀ x = v (u·x)`.
    pub fn transpose_mul(&self, x: &[f64]) -> Vec<f64> {
        let s: f64 = self.u.iter().zip(x).map(|(a, b)| a * b).sum();
        self.v.iter().map(|v| v * s).collect()
    }
}

/// Factors of a bootstrapped TD term: `(∇V(x) - discount ∇V(x')) ⊗ ∇V(x)`.
pub fn td_factors(grad_v: &[f64], grad_v_next: &[f64], discount: f64) -> RankOne {
    RankOne {
        u: grad_v
            .iter()
            .zip(grad_v_next)
            .map(|(a, b)| a - discount * b)
            .collect(),
        v: grad_v.to_vec(),
    }
}

/// Least-squares term `∇f ⊗ ∇f`.
pub fn z_regression(grad_f: &[f64], kind: TermKind) -> TaylorTerm {
    let mut t = TaylorTerm::zeros(kind, grad_f.len());
    t.add_outer(grad_f, grad_f, 1.0);
    t
}

/// TD(0) term `(∇V(s) - γ∇V(s')) ⊗ ∇V(s)`. Terminal transitions pass a zero
/// `grad_v_next`.
pub fn z_td0(grad_v: &[f64], grad_v_next: &[f64], gamma: f64, kind: TermKind) -> TaylorTerm {
    td_factors(grad_v, grad_v_next, gamma).to_term(kind)
}

/// n-step TD term `(∇V(x_t) - γⁿ∇V(x_{t+n})) ⊗ ∇V(x_t)`.
pub fn z_td_n(
    grad_v: &[f64],
    grad_v_n: &[f64],
    gamma: f64,
    n_steps: u32,
    kind: TermKind,
) -> TaylorTerm {
    td_factors(grad_v, grad_v_n, gamma.powi(n_steps as i32)).to_term(kind)
}

/// Forward-view TD(λ) term truncated at the horizon covered by `grads`
/// (`grads[j]` is `∇V(x_{t+j})`):
/// `(∇V(x_t) - (1-λ) Σ_{j≥1} (γλ)^j ∇V(x_{t+j})) ⊗ ∇V(x_t)`.
pub fn z_td_lambda(
    grads: &[Vec<f64>],
    gamma: f64,
    lambda: f64,
    kind: TermKind,
) -> Result<TaylorTerm> {
    let Some(first) = grads.first() else {
        return Err(Error::contract("TD(λ) term needs at least ∇V(x_t)"));
    };
    if grads.iter().any(|g| g.len() != first.len()) {
        return Err(Error::contract("TD(λ) gradients differ in length"));
    }
    let mut u = first.clone();
    let mut weight = 1.0 - lambda;
    for g in &grads[1..] {
        weight *= gamma * lambda;
        for (ui, gi) in u.iter_mut().zip(g) {
            *ui -= weight * gi;
        }
    }
    Ok(RankOne {
        u,
        v: first.clone(),
    }
    .to_term(kind))
}

/// Aggregates per-sample terms the same way the minibatch gradient is
/// aggregated.
pub fn z_minibatch(per_sample: &[TaylorTerm], scaling: Scaling) -> Result<TaylorTerm> {
    let Some(first) = per_sample.first() else {
        return Err(Error::contract(
            "minibatch Taylor term needs at least one sample",
        ));
    };
    let mut acc = TaylorTerm::zeros(first.kind(), first.dim());
    for t in per_sample {
        acc.blend(1.0, 1.0, t)?;
    }
    if scaling == Scaling::Mean {
        acc.scale(1.0 / per_sample.len() as f64);
    }
    Ok(acc)
}
