use std::collections::VecDeque;
use std::sync::Arc;

use crate::model::{dot, ModelSpec};
use crate::tasks::{sample_grad, Example};
use crate::taylor::RankOne;

/// Mean squared error of `V_θ` against reference values on `eval_states`.
pub fn value_mse(
    model: &ModelSpec,
    params: &[f64],
    eval_states: &[Vec<f64>],
    reference: &[f64],
) -> f64 {
    assert_eq!(
        eval_states.len(),
        reference.len(),
        "contract violation: {} eval states but {} reference values",
        eval_states.len(),
        reference.len()
    );
    let sum: f64 = eval_states
        .iter()
        .zip(reference)
        .map(|(s, r)| (model.forward(params, s) - r).powi(2))
        .sum();
    sum / eval_states.len() as f64
}

/// One training sample as it was seen: the parameters it was evaluated at,
/// its gradient, Taylor factors and (for TD) the bootstrap value `V_θi(s'_i)`.
#[derive(Clone, Debug)]
pub struct HistoryEntry {
    pub step: usize,
    /// Shared between all samples of one minibatch.
    pub params_snapshot: Arc<Vec<f64>>,
    pub example: Example,
    pub grad: Vec<f64>,
    pub factors: RankOne,
    pub value_at_snapshot: Option<f64>,
}

impl HistoryEntry {
    /// Builds the entry for `example` evaluated at `params_snapshot`.
    pub fn record(
        model: &ModelSpec,
        step: usize,
        params_snapshot: Arc<Vec<f64>>,
        example: Example,
    ) -> Self {
        let sg = sample_grad(model, &params_snapshot, &example, None, true);
        let value_at_snapshot = example
            .bootstrap_input()
            .map(|s| model.forward(&params_snapshot, s));
        HistoryEntry {
            step,
            grad: sg.gradient(),
            factors: sg.taylor_factors(),
            params_snapshot,
            example,
            value_at_snapshot,
        }
    }
}

/// Bounded window of the most recent samples.
#[derive(Clone, Debug)]
pub struct History {
    entries: VecDeque<HistoryEntry>,
    capacity: usize,
}

impl History {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "history capacity must be positive");
        History {
            entries: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, entry: HistoryEntry) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &HistoryEntry> {
        self.entries.iter()
    }
}

/// Mean of `(V_θi(s'_i) - V_θnow(s'_i))²` over entries with a bootstrap
/// target; `None` when there are none.
pub fn value_drift<'a>(
    history: impl IntoIterator<Item = &'a HistoryEntry>,
    model: &ModelSpec,
    params_now: &[f64],
) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for e in history {
        if let (Some(then), Some(s_next)) = (e.value_at_snapshot, e.example.bootstrap_input()) {
            sum += (then - model.forward(params_now, s_next)).powi(2);
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (dot(a, a).sqrt(), dot(b, b).sqrt());
    (na >= 1e-12 && nb >= 1e-12).then(|| dot(a, b) / (na * nb))
}

/// Mean cosine between the first-order prediction `g_i + Z_iᵀ(θ_now - θ_i)`
/// and the gradient of the same sample recomputed at `θ_now`. Pairs where
/// either vector is (numerically) zero are skipped; `None` if all are.
pub fn taylor_cosine<'a>(
    history: impl IntoIterator<Item = &'a HistoryEntry>,
    model: &ModelSpec,
    params_now: &[f64],
) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for e in history {
        let delta: Vec<f64> = params_now
            .iter()
            .zip(e.params_snapshot.iter())
            .map(|(now, then)| now - then)
            .collect();
        let correction = e.factors.transpose_mul(&delta);
        let predicted: Vec<f64> = e.grad.iter().zip(&correction).map(|(g, c)| g + c).collect();
        let actual = sample_grad(model, params_now, &e.example, None, false).gradient();
        if let Some(c) = cosine(&predicted, &actual) {
            sum += c;
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}
