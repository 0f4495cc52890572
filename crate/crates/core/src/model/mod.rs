//! Differentiable value/regression models over a flat parameter vector.
//!
//! Three families are supported: a LeakyReLU MLP, a linear model on top of a
//! grid of Gaussian radial basis features, and a plain linear model on the raw
//! input. Every family exposes the exact gradient of its scalar output with
//! respect to the flat parameters; there is no general autodiff here.

mod mlp;
mod rbf;

use std::ops::{Deref, DerefMut};

pub use mlp::{MlpSpec, DEFAULT_LEAKY_SLOPE};
pub use rbf::RbfSpec;

use crate::error::{Error, Result};

/// Flat real parameter vector shared by every model, optimizer and metric.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn zeros(n: usize) -> Self {
        ParamVector(vec![0.0; n])
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        ParamVector(values)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(values: Vec<f64>) -> Self {
        ParamVector(values)
    }
}

/// Output of a model evaluation together with its parameter gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct GradResult {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Linear model on the raw input, `f(x) = θ·x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSpec {
    pub dim: usize,
}

impl LinearSpec {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config(
                "linear model needs a non-zero input dimension",
            ));
        }
        Ok(LinearSpec { dim })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Mlp(MlpSpec),
    Rbf(RbfSpec),
    Linear(LinearSpec),
}

impl ModelSpec {
    pub fn num_params(&self) -> usize {
        match self {
            ModelSpec::Mlp(m) => m.num_params(),
            ModelSpec::Rbf(r) => r.num_features(),
            ModelSpec::Linear(l) => l.dim,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            ModelSpec::Mlp(m) => m.layer_widths[0],
            ModelSpec::Rbf(_) => 2,
            ModelSpec::Linear(l) => l.dim,
        }
    }

    /// True when the output is linear in the parameters, so the outer-product
    /// Taylor term is exact.
    pub fn is_linear_in_params(&self) -> bool {
        !matches!(self, ModelSpec::Mlp(_))
    }

    /// Deterministic initial parameters. MLP weights are drawn from
    /// `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` with zero biases; linear families
    /// start at zero.
    pub fn init_params(&self, seed: u64) -> ParamVector {
        match self {
            ModelSpec::Mlp(m) => m.init_params(seed),
            _ => ParamVector::zeros(self.num_params()),
        }
    }

    fn check(&self, params: &[f64], x: &[f64]) {
        assert_eq!(
            params.len(),
            self.num_params(),
            "contract violation: parameter length mismatch"
        );
        assert_eq!(
            x.len(),
            self.input_dim(),
            "contract violation: input dimension mismatch"
        );
    }

    /// Scalar model output. Panics on a parameter or input length mismatch.
    pub fn forward(&self, params: &[f64], x: &[f64]) -> f64 {
        self.check(params, x);
        match self {
            ModelSpec::Mlp(m) => m.forward(params, x),
            ModelSpec::Rbf(r) => dot(params, &r.features(x)),
            ModelSpec::Linear(_) => dot(params, x),
        }
    }

    /// Exact gradient of [`forward`](Self::forward) with respect to `params`.
    pub fn grad(&self, params: &[f64], x: &[f64]) -> GradResult {
        self.check(params, x);
        match self {
            ModelSpec::Mlp(m) => m.grad(params, x),
            ModelSpec::Rbf(r) => {
                let phi = r.features(x);
                GradResult {
                    value: dot(params, &phi),
                    grad: phi,
                }
            }
            ModelSpec::Linear(_) => GradResult {
                value: dot(params, x),
                grad: x.to_vec(),
            },
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_forward_is_a_dot_product() {
        let spec = ModelSpec::Linear(LinearSpec::new(2).unwrap());
        assert_eq!(spec.forward(&[0.5, -1.0], &[2.0, 1.0]), 0.0);
    }

    #[test]
    fn linear_grad_is_the_input() {
        let spec = ModelSpec::Linear(LinearSpec::new(3).unwrap());
        let g = spec.grad(&[3.0, -2.0, 9.0], &[0.1, 0.2, 0.3]);
        assert_eq!(g.grad, vec![0.1, 0.2, 0.3]);
    }

    #[test]
    #[should_panic(expected = "input dimension")]
    fn forward_rejects_wrong_input_dim() {
        let spec = ModelSpec::Linear(LinearSpec::new(2).unwrap());
        spec.forward(&[1.0, 1.0], &[1.0]);
    }

    #[test]
    fn zero_dim_linear_is_a_config_error() {
        assert!(matches!(LinearSpec::new(0), Err(Error::Config(_))));
    }
}
