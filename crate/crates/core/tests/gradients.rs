mod common;

use common::{central_diff, rel_err};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdmomentum::model::{LinearSpec, MlpSpec, ModelSpec, RbfSpec};
use tdmomentum::tasks::{grad_bundle, td0_grad_bundle, Example, TdExample, Transition};
use tdmomentum::taylor::{Scaling, TermKind};

fn rbf(n_grid: usize, sigma_sq: f64) -> ModelSpec {
    ModelSpec::Rbf(RbfSpec::new(n_grid, sigma_sq, [[-1.0, 1.0], [-1.0, 1.0]], true).unwrap())
}

proptest! {
    #[test]
    fn rbf_gradient_matches_finite_differences(n_grid in 2usize..6, sigma_sq in 0.1f64..4.0, seed in 0u64..1000) {
        let m = rbf(n_grid, sigma_sq);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_vec(&mut rng, m.num_params(), 1.0);
        let x = common::random_vec(&mut rng, 2, 1.0);
        let fd = central_diff(|q| m.forward(q, &x), &p, 1e-6);
        prop_assert!(rel_err(&m.grad(&p, &x).grad, &fd) <= 1e-5);
    }

    #[test]
    fn linear_models_are_additive(seed in 0u64..1000, sigma_sq in 0.1f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in [rbf(4, sigma_sq), ModelSpec::Linear(LinearSpec::new(5).unwrap())] {
            let a = common::random_vec(&mut rng, m.num_params(), 1.0);
            let b = common::random_vec(&mut rng, m.num_params(), 1.0);
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let x = common::random_vec(&mut rng, m.input_dim(), 1.0);
            let lhs = m.forward(&sum, &x);
            let rhs = m.forward(&a, &x) + m.forward(&b, &x);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}

#[test]
fn td_semi_gradient_matches_finite_differences_with_fixed_bootstrap() {
    let m = ModelSpec::Mlp(MlpSpec::new(vec![2, 8, 8, 1], 0.01).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 50 {
        let p = m.init_params(rng.gen());
        let batch: Vec<Transition> = (0..4)
            .map(|i| Transition {
                s: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                a: 1,
                r: -1.0,
                s_next: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                terminal: i == 3,
            })
            .collect();
        let spec = match &m {
            ModelSpec::Mlp(s) => s,
            _ => unreachable!(),
        };
        if batch
            .iter()
            .any(|t| spec.min_abs_hidden_preactivation(&p, &t.s) < 1e-4)
        {
            continue;
        }
        let gamma = 0.9;
        let targets: Vec<f64> = batch
            .iter()
            .map(|t| {
                t.r + if t.terminal {
                    0.0
                } else {
                    gamma * m.forward(&p, &t.s_next)
                }
            })
            .collect();
        let loss = |q: &[f64]| {
            batch
                .iter()
                .zip(&targets)
                .map(|(t, y)| 0.5 * (m.forward(q, &t.s) - y).powi(2))
                .sum::<f64>()
                / batch.len() as f64
        };
        let b = td0_grad_bundle(&m, &p, &batch, gamma, None);
        assert!((b.mean_loss - loss(&p)).abs() < 1e-12);
        let fd = central_diff(loss, &p, 1e-6);
        assert!(rel_err(&b.grad, &fd) <= 1e-5, "{}", rel_err(&b.grad, &fd));
        checked += 1;
    }
}

fn shifted(p: &[f64], d: &[f64], eps: f64) -> Vec<f64> {
    p.iter().zip(d).map(|(a, b)| a + eps * b).collect()
}

#[test]
fn taylor_term_is_exact_for_linear_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [rbf(5, 1.0), ModelSpec::Linear(LinearSpec::new(6).unwrap())] {
        let n = m.num_params();
        let d = m.input_dim();
        let batch: Vec<Example> = (0..5)
            .map(|i| {
                let s = common::random_vec(&mut rng, d, 1.0);
                if i % 2 == 0 {
                    Example::Regression {
                        x: s,
                        y: rng.gen_range(-1.0..1.0),
                    }
                } else {
                    Example::Td(TdExample {
                        s,
                        ret: -1.0,
                        s_next: common::random_vec(&mut rng, d, 1.0),
                        discount: 0.95,
                    })
                }
            })
            .collect();
        let p = common::random_vec(&mut rng, n, 1.0);
        let delta = common::random_vec(&mut rng, n, 2.0);
        let at_p = grad_bundle(&m, &p, &batch, None, true);
        let moved = grad_bundle(&m, &shifted(&p, &delta, 1.0), &batch, None, true);
        let z = at_p.taylor_term(TermKind::Full, Scaling::Mean);
        let predicted: Vec<f64> = at_p
            .grad
            .iter()
            .zip(z.transpose_mul(&delta))
            .map(|(g, c)| g + c)
            .collect();
        assert!(
            rel_err(&predicted, &moved.grad) < 1e-12,
            "{}",
            rel_err(&predicted, &moved.grad)
        );
    }
}

#[test]
fn mlp_taylor_residual_shrinks_with_the_error() {
    let m = ModelSpec::Mlp(MlpSpec::uniform(2, 8, 3, 0.01).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = m.init_params(3).into_vec();
    let x = vec![0.3, -0.6];
    let dir = common::random_vec(&mut rng, m.num_params(), 1.0);
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let eps = 1e-6;
    let f0 = m.forward(&p, &x);
    let residual = |err: f64| {
        let batch = [Example::Regression {
            x: x.clone(),
            y: f0 - err,
        }];
        let a = grad_bundle(&m, &p, &batch, None, true);
        let b = grad_bundle(&m, &shifted(&p, &dir, eps), &batch, None, true);
        let z = a.taylor_term(TermKind::Full, Scaling::Mean);
        let zd = z.transpose_mul(&dir);
        let r: f64 = (0..dir.len())
            .map(|j| (b.grad[j] - a.grad[j] - eps * zd[j]).powi(2))
            .sum::<f64>()
            .sqrt();
        r / (eps * norm)
    };
    let rs: Vec<f64> = [1.0, 0.1, 0.01, 0.0].iter().map(|&e| residual(e)).collect();
    assert!(rs.iter().all(|r| r.is_finite() && *r < 10.0), "{rs:?}");
    assert!(rs.windows(2).all(|w| w[1] < w[0]), "{rs:?}");
    assert!(rs[3] < 1e-4, "{rs:?}");
}

#[test]
fn init_and_forward_are_deterministic() {
    let m = ModelSpec::Mlp(MlpSpec::uniform(1, 8, 4, 0.01).unwrap());
    let a = m.init_params(7);
    assert_eq!(a, m.init_params(7));
    let xs: Vec<f64> = (0..20).map(|i| -1.0 + 0.1 * i as f64).collect();
    let f1: Vec<u64> = xs.iter().map(|&x| m.forward(&a, &[x]).to_bits()).collect();
    let f2: Vec<u64> = xs.iter().map(|&x| m.forward(&a, &[x]).to_bits()).collect();
    assert_eq!(f1, f2);
}
