//! Hand-rolled gradients of the MLP, RBF and linear models, checked against
//! central finite differences.
use tdmomentum::model::{LinearSpec, MlpSpec, ModelSpec, RbfSpec};

fn central_diff(model: &ModelSpec, params: &[f64], x: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    let mut probe = params.to_vec();
    (0..params.len())
        .map(|j| {
            probe[j] = params[j] + h;
            let up = model.forward(&probe, x);
            probe[j] = params[j] - h;
            let down = model.forward(&probe, x);
            probe[j] = params[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn main() -> tdmomentum::Result<()> {
    let models = [
        (
            "mlp [2,16,16,16,1]",
            ModelSpec::Mlp(MlpSpec::uniform(2, 16, 4, 0.01)?),
        ),
        (
            "rbf 20x20, sigma^2=1",
            ModelSpec::Rbf(RbfSpec::new(20, 1.0, [[-1.0, 1.0], [-1.0, 1.0]], true)?),
        ),
        ("linear n=2", ModelSpec::Linear(LinearSpec::new(2)?)),
    ];
    let x = [0.3, -0.7];
    for (name, model) in &models {
        let mut params = model.init_params(0).into_vec();
        // Linear families start at zero; give them something to differentiate.
        if !matches!(model, ModelSpec::Mlp(_)) {
            params
                .iter_mut()
                .enumerate()
                .for_each(|(i, p)| *p = (i as f64 * 0.37).sin());
        }
        let g = model.grad(&params, &x);
        let fd = central_diff(model, &params, &x);
        let err = g
            .grad
            .iter()
            .zip(&fd)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = g.grad.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        println!(
            "{name:22} params={:5} f(x)={:+.6} max|grad - fd|/max|grad| = {:.2e}",
            model.num_params(),
            g.value,
            err / scale
        );
    }
    Ok(())
}
