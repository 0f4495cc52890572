//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;

/// Central finite differences of `f` at `x` with step `h`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            probe[j] = x[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `‖a - b‖∞ / max(‖a‖∞, ‖b‖∞)`, zero when both vanish.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = max_abs(a).max(max_abs(b));
    if scale == 0.0 {
        0.0
    } else {
        max_abs(&diff) / scale
    }
}

/// Dense `n x n` matrix stored as rows.
pub type Dense = Vec<Vec<f64>>;

pub fn outer(u: &[f64], v: &[f64]) -> Dense {
    u.iter()
        .map(|a| v.iter().map(|b| a * b).collect())
        .collect()
}

/// `Zᵀ x` for a dense row-major `Z`.
pub fn transpose_mul(z: &Dense, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| (0..n).map(|j| z[j][k] * x[j]).sum())
        .collect()
}

/// Brute-force corrected momentum at step `t` (1-based) from the whole
/// history of gradients, Taylor terms and the previously produced μ̂'s:
/// `μ_t - α(1-β) Σ_{k<t} Σ_{i<=k} β^{t-i} Z_iᵀ μ̂_k`.
pub fn closed_form_mu_hat(
    gs: &[Vec<f64>],
    zs: &[Dense],
    mu_hats: &[Vec<f64>],
    alpha: f64,
    beta: f64,
    t: usize,
) -> Vec<f64> {
    let n = gs[0].len();
    let mut out = vec![0.0; n];
    for i in 1..=t {
        let w = (1.0 - beta) * beta.powi((t - i) as i32);
        for j in 0..n {
            out[j] += w * gs[i - 1][j];
        }
    }
    for k in 1..t {
        for i in 1..=k {
            let w = alpha * (1.0 - beta) * beta.powi((t - i) as i32);
            let zm = transpose_mul(&zs[i - 1], &mu_hats[k - 1]);
            for j in 0..n {
                out[j] -= w * zm[j];
            }
        }
    }
    out
}

pub fn random_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}
