use super::examples::{Example, TdExample};
use super::mountain_car::Transition;
use crate::model::ModelSpec;
use crate::taylor::{RankOne, Scaling, TaylorTerm, TermKind};

/// Per-sample loss quantities. The sample loss is `δ²/2` with
/// `δ = prediction - target`, so its (semi-)gradient is `δ ∇f`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrad {
    pub value: f64,
    pub delta: f64,
    pub grad_f: Vec<f64>,
    /// `∇V(s')` on the online parameters; absent for regression, terminal
    /// transitions, or when the Taylor factors were not requested.
    pub grad_next: Option<Vec<f64>>,
    /// Weight of the bootstrap value in the target.
    pub discount: f64,
}

impl SampleGrad {
    pub fn loss(&self) -> f64 {
        0.5 * self.delta * self.delta
    }

    pub fn gradient(&self) -> Vec<f64> {
        self.grad_f.iter().map(|g| self.delta * g).collect()
    }

    /// `(∇f - discount ∇V(s')) ⊗ ∇f`, or `∇f ⊗ ∇f` without a bootstrap.
    pub fn taylor_factors(&self) -> RankOne {
        let u = match &self.grad_next {
            Some(gn) => self
                .grad_f
                .iter()
                .zip(gn)
                .map(|(a, b)| a - self.discount * b)
                .collect(),
            None => self.grad_f.clone(),
        };
        RankOne {
            u,
            v: self.grad_f.clone(),
        }
    }
}

/// Minibatch loss, gradient (mean over samples) and the per-sample pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct GradBundle {
    pub mean_loss: f64,
    pub grad: Vec<f64>,
    pub samples: Vec<SampleGrad>,
}

impl GradBundle {
    pub fn taylor_factors(&self) -> Vec<RankOne> {
        self.samples
            .iter()
            .map(SampleGrad::taylor_factors)
            .collect()
    }

    pub fn taylor_term(&self, kind: TermKind, scaling: Scaling) -> TaylorTerm {
        let mut z = TaylorTerm::zeros(kind, self.grad.len());
        let w = match scaling {
            Scaling::Sum => 1.0,
            Scaling::Mean => 1.0 / self.samples.len() as f64,
        };
        for f in self.taylor_factors() {
            z.add_outer(&f.u, &f.v, w);
        }
        z
    }
}

/// Evaluates one example. `frozen` replaces the parameters used for the
/// bootstrap value (never its gradient). `want_next_grad` additionally
/// differentiates `V(s')` on the online parameters for the Taylor term.
pub fn sample_grad(
    model: &ModelSpec,
    params: &[f64],
    example: &Example,
    frozen: Option<&[f64]>,
    want_next_grad: bool,
) -> SampleGrad {
    match example {
        Example::Regression { x, y } => {
            let g = model.grad(params, x);
            SampleGrad {
                value: g.value,
                delta: g.value - y,
                grad_f: g.grad,
                grad_next: None,
                discount: 0.0,
            }
        }
        Example::Td(td) => td_sample(model, params, td, frozen, want_next_grad),
    }
}

fn td_sample(
    model: &ModelSpec,
    params: &[f64],
    td: &TdExample,
    frozen: Option<&[f64]>,
    want_next_grad: bool,
) -> SampleGrad {
    let g = model.grad(params, &td.s);
    let (bootstrap, grad_next) = if td.discount == 0.0 {
        (0.0, None)
    } else if want_next_grad {
        let gn = model.grad(params, &td.s_next);
        let v = match frozen {
            Some(f) => model.forward(f, &td.s_next),
            None => gn.value,
        };
        (v, Some(gn.grad))
    } else {
        (model.forward(frozen.unwrap_or(params), &td.s_next), None)
    };
    let target = td.ret + td.discount * bootstrap;
    SampleGrad {
        value: g.value,
        delta: g.value - target,
        grad_f: g.grad,
        grad_next,
        discount: td.discount,
    }
}

pub fn grad_bundle(
    model: &ModelSpec,
    params: &[f64],
    batch: &[Example],
    frozen: Option<&[f64]>,
    want_next_grad: bool,
) -> GradBundle {
    assert!(!batch.is_empty(), "contract violation: empty minibatch");
    let samples: Vec<SampleGrad> = batch
        .iter()
        .map(|e| sample_grad(model, params, e, frozen, want_next_grad))
        .collect();
    let m = samples.len() as f64;
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for s in &samples {
        loss += s.loss();
        for (acc, gi) in grad.iter_mut().zip(&s.grad_f) {
            *acc += s.delta * gi;
        }
    }
    grad.iter_mut().for_each(|g| *g /= m);
    GradBundle {
        mean_loss: loss / m,
        grad,
        samples,
    }
}

/// Minibatch TD(0) bundle on transitions already in model coordinates.
pub fn td0_grad_bundle(
    model: &ModelSpec,
    params: &[f64],
    batch: &[Transition],
    gamma: f64,
    frozen: Option<&[f64]>,
) -> GradBundle {
    let examples: Vec<Example> = batch
        .iter()
        .map(|t| Example::Td(TdExample::from_transition(t, gamma, |s| *s)))
        .collect();
    grad_bundle(model, params, &examples, frozen, true)
}

pub fn regression_grad_bundle(
    model: &ModelSpec,
    params: &[f64],
    batch: &[(Vec<f64>, f64)],
) -> GradBundle {
    let examples: Vec<Example> = batch
        .iter()
        .map(|(x, y)| Example::Regression {
            x: x.clone(),
            y: *y,
        })
        .collect();
    grad_bundle(model, params, &examples, None, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearSpec, RbfSpec};

    fn linear(n: usize) -> ModelSpec {
        ModelSpec::Linear(LinearSpec::new(n).unwrap())
    }

    fn tr(s: [f64; 2], r: f64, s_next: [f64; 2], terminal: bool) -> Transition {
        Transition {
            s,
            a: 1,
            r,
            s_next,
            terminal,
        }
    }

    #[test]
    fn zero_value_function_gives_unit_td_error() {
        let rbf = ModelSpec::Rbf(RbfSpec::new(5, 1.0, [[-1.0, 1.0], [-1.0, 1.0]], true).unwrap());
        let params = vec![0.0; rbf.num_params()];
        let b = td0_grad_bundle(
            &rbf,
            &params,
            &[tr([0.1, 0.2], -1.0, [0.3, -0.4], false)],
            0.99,
            None,
        );
        assert_eq!(b.samples[0].delta, 1.0);
        assert_eq!(b.mean_loss, 0.5);
    }

    #[test]
    fn terminal_target_is_the_reward() {
        let m = linear(2);
        let params = [2.0, 3.0];
        let b = td0_grad_bundle(
            &m,
            &params,
            &[tr([1.0, 0.0], -1.0, [0.0, 1.0], true)],
            0.9,
            None,
        );
        // V(s) = 2, target = -1
        assert_eq!(b.samples[0].delta, 3.0);
        assert!(b.samples[0].grad_next.is_none());
        assert_eq!(b.grad, vec![3.0, 0.0]);
    }

    #[test]
    fn exact_values_on_a_chain_give_zero_error() {
        // s0 -> s1 -> terminal, r = -1 each, γ = 0.5: V(s1) = -1, V(s0) = -1.5.
        let m = linear(2);
        let params = [-1.5, -1.0];
        let batch = [
            tr([1.0, 0.0], -1.0, [0.0, 1.0], false),
            tr([0.0, 1.0], -1.0, [0.0, 0.0], true),
        ];
        let b = td0_grad_bundle(&m, &params, &batch, 0.5, None);
        assert!(b.samples.iter().all(|s| s.delta == 0.0));
        assert_eq!(b.grad, vec![0.0, 0.0]);
        assert_eq!(b.mean_loss, 0.0);
    }

    #[test]
    fn regression_by_hand() {
        let m = linear(2);
        let b = regression_grad_bundle(&m, &[0.0, 0.0], &[(vec![1.0, 0.0], 1.0)]);
        assert_eq!(b.samples[0].delta, -1.0);
        assert_eq!(b.grad, vec![-1.0, 0.0]);
        assert_eq!(b.mean_loss, 0.5);
        let perfect = regression_grad_bundle(
            &m,
            &[2.0, -1.0],
            &[(vec![1.0, 1.0], 1.0), (vec![0.5, 1.0], 0.0)],
        );
        assert_eq!(perfect.mean_loss, 0.0);
        assert_eq!(perfect.grad, vec![0.0, 0.0]);
    }

    #[test]
    fn frozen_target_only_changes_the_bootstrap_value() {
        let m = linear(2);
        let params = [1.0, 2.0];
        let frozen = [0.0, 0.0];
        let t = tr([1.0, 0.0], -1.0, [0.0, 1.0], false);
        let online = td0_grad_bundle(&m, &params, &[t], 0.5, None);
        let fixed = td0_grad_bundle(&m, &params, &[t], 0.5, Some(&frozen));
        assert_eq!(online.samples[0].delta, 1.0 - (-1.0 + 0.5 * 2.0));
        assert_eq!(fixed.samples[0].delta, 1.0 - (-1.0));
        assert_eq!(online.samples[0].grad_next, fixed.samples[0].grad_next);
        let same = td0_grad_bundle(&m, &params, &[t], 0.5, Some(&params));
        assert_eq!(same, online);
    }

    #[test]
    fn mean_scaling_of_taylor_term() {
        let m = linear(2);
        let b = regression_grad_bundle(
            &m,
            &[0.0, 0.0],
            &[(vec![1.0, 0.0], 1.0), (vec![0.0, 2.0], 1.0)],
        );
        let z = b.taylor_term(TermKind::Full, Scaling::Mean);
        assert_eq!(z.get(0, 0), 0.5);
        assert_eq!(z.get(1, 1), 2.0);
        assert_eq!(z.get(0, 1), 0.0);
    }
}
