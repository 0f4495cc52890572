//! Value drift and Taylor cosine over a window of recent samples during TD
//! training, plus a bootstrap confidence interval over seeds.
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tdmomentum::metrics::{bootstrap_ci, taylor_cosine, value_drift, History, HistoryEntry};
use tdmomentum::model::{MlpSpec, ModelSpec, RbfSpec};
use tdmomentum::optim::{effective_horizon, CorrectedState, HyperParams};
use tdmomentum::tasks::{
    collect_transitions, grad_bundle, normalize_state, EnergyPolicy, Example, ReplayBuffer,
    TdExample,
};
use tdmomentum::taylor::{Scaling, TermKind};

/// Trains for `steps` and returns the (drift, cosine) measured at the end.
fn train(model: &ModelSpec, seed: u64, steps: usize) -> tdmomentum::Result<(f64, f64)> {
    let examples: Vec<Example> = collect_transitions(&EnergyPolicy, 20, seed)
        .iter()
        .map(|t| Example::Td(TdExample::from_transition(t, 0.9, normalize_state)))
        .collect();
    let buffer = ReplayBuffer::from_items(examples);
    let hp = HyperParams::new(0.1, 0.9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = model.init_params(seed).into_vec();
    let mut st = CorrectedState::new(params.len(), TermKind::Full);
    let mut history = History::new(effective_horizon(hp.beta, 16));
    for step in 0..steps {
        let batch = buffer.sample(16, &mut rng);
        let snapshot = Arc::new(params.clone());
        for e in &batch {
            history.push(HistoryEntry::record(
                model,
                step,
                snapshot.clone(),
                e.clone(),
            ));
        }
        let bundle = grad_bundle(model, &params, &batch, None, true);
        st.step_factored(
            &hp,
            &bundle.grad,
            &bundle.taylor_factors(),
            Scaling::Mean,
            &mut params,
        )?;
    }
    let drift = value_drift(history.entries(), model, &params).unwrap_or(0.0);
    let cosine = taylor_cosine(history.entries(), model, &params).unwrap_or(1.0);
    Ok((drift, cosine))
}

fn main() -> tdmomentum::Result<()> {
    let mlp = ModelSpec::Mlp(MlpSpec::uniform(2, 16, 4, 0.01)?);
    let rbf = ModelSpec::Rbf(RbfSpec::new(20, 1.0, [[-1.0, 1.0], [-1.0, 1.0]], true)?);
    for (name, model) in [("mlp", &mlp), ("rbf", &rbf)] {
        let mut drifts = Vec::new();
        for seed in 0..5 {
            let (drift, cosine) = train(model, seed, 300)?;
            println!("{name} seed {seed}: drift {drift:.3e}, taylor cosine {cosine:.4}");
            drifts.push(drift);
        }
        let (lo, hi) = bootstrap_ci(&drifts, 0.95, 10_000, 0);
        println!("{name}: 95% CI of mean drift ({lo:.3e}, {hi:.3e})");
    }
    Ok(())
}
