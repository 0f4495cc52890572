//! Plain, corrected, diagonal and oracle momentum driven by hand on the sine
//! regression task, without the experiment runner.
use tdmomentum::model::{MlpSpec, ModelSpec};
use tdmomentum::optim::{CorrectedState, HyperParams, MomentumState, OracleState};
use tdmomentum::tasks::{grad_bundle, sine_dataset, Example, ReplayBuffer};
use tdmomentum::taylor::{Scaling, TermKind};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STEPS: usize = 2000;

fn full_loss(model: &ModelSpec, params: &[f64], data: &[Example]) -> f64 {
    grad_bundle(model, params, data, None, false).mean_loss
}

fn main() -> tdmomentum::Result<()> {
    let model = ModelSpec::Mlp(MlpSpec::uniform(1, 16, 4, 0.01)?);
    let data: Vec<Example> = sine_dataset(2000, 0)
        .into_iter()
        .map(|(x, y)| Example::Regression { x: vec![x], y })
        .collect();
    let buffer = ReplayBuffer::from_items(data.clone());
    let hp = HyperParams::new(0.05, 0.9);
    let init = model.init_params(0).into_vec();
    let n = init.len();

    let batches: Vec<Vec<Example>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        (0..STEPS).map(|_| buffer.sample(16, &mut rng)).collect()
    };

    let mut p = init.clone();
    let mut st = MomentumState::new(n);
    for b in &batches {
        let g = grad_bundle(&model, &p, b, None, false).grad;
        st.step(&hp, &g, &mut p)?;
    }
    println!("momentum        loss {:.5}", full_loss(&model, &p, &data));

    for (name, kind) in [
        ("corrected", TermKind::Full),
        ("corrected_diag", TermKind::Diagonal),
    ] {
        let mut p = init.clone();
        let mut st = CorrectedState::new(n, kind);
        for b in &batches {
            let bundle = grad_bundle(&model, &p, b, None, true);
            st.step_factored(
                &hp,
                &bundle.grad,
                &bundle.taylor_factors(),
                Scaling::Mean,
                &mut p,
            )?;
        }
        let eta = st.eta.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        println!(
            "{name:15} loss {:.5} (max |η| {eta:.2e})",
            full_loss(&model, &p, &data)
        );
    }

    let mut p = init;
    let mut st = OracleState::new(hp.beta);
    for b in &batches {
        st.step(
            &hp,
            b.clone(),
            |bb, q| grad_bundle(&model, q, bb, None, false).grad,
            &mut p,
        )?;
    }
    println!(
        "oracle          loss {:.5} (window of {} minibatches)",
        full_loss(&model, &p, &data),
        st.horizon()
    );
    Ok(())
}
