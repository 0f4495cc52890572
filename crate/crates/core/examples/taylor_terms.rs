//! The outer-product Taylor terms: for a linear model the TD(0) semi-gradient
//! moves exactly as `g(θ+Δ) = g(θ) + ZᵀΔ`; for an MLP the error is second order.
use tdmomentum::model::{MlpSpec, ModelSpec, RbfSpec};
use tdmomentum::tasks::{sample_grad, Example, TdExample};
use tdmomentum::taylor::TermKind;

fn main() -> tdmomentum::Result<()> {
    let example = Example::Td(TdExample {
        s: vec![-0.2, 0.1],
        ret: -1.0,
        s_next: vec![-0.15, 0.2],
        discount: 0.9,
    });
    let rbf = ModelSpec::Rbf(RbfSpec::new(10, 1.0, [[-1.0, 1.0], [-1.0, 1.0]], true)?);
    let mlp = ModelSpec::Mlp(MlpSpec::uniform(2, 16, 4, 0.01)?);

    for (name, model) in [("rbf", &rbf), ("mlp", &mlp)] {
        let theta = model.init_params(1).into_vec();
        let here = sample_grad(model, &theta, &example, None, true);
        let z = here.taylor_factors().to_term(TermKind::Full);
        println!("{name}: n={} |Z diag| max = {:.3e}", model.num_params(), {
            z.diag().iter().fold(0.0f64, |m, d| m.max(d.abs()))
        });
        for scale in [1e-1, 1e-2, 1e-3] {
            let delta: Vec<f64> = (0..theta.len())
                .map(|i| scale * ((i * 7 % 13) as f64 - 6.0) / 6.0)
                .collect();
            let moved: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
            let truth = sample_grad(model, &moved, &example, None, false).gradient();
            let predicted: Vec<f64> = here
                .gradient()
                .iter()
                .zip(z.transpose_mul(&delta))
                .map(|(g, c)| g + c)
                .collect();
            let err = truth
                .iter()
                .zip(&predicted)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            println!("  |Δ|∞ = {scale:.0e}: max |g(θ+Δ) - (g + ZᵀΔ)| = {err:.3e}");
        }
    }
    Ok(())
}
